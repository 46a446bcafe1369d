"""Exception hierarchy shared by all modules.

Numerical failures derive from ``NumericalError`` so the CLI can map them to
exit code 3; configuration problems derive from ``ConfigError`` (exit 2).
"""


class HypwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(HypwaveError, ValueError):
    """Invalid experiment configuration or invalid input parameters."""


class NumericalError(HypwaveError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


# special functions
class SpecFunError(NumericalError):
    pass


class NonConvergence(SpecFunError):
    pass


class DomainError(SpecFunError, ValueError):
    pass


class PoleError(SpecFunError, ValueError):
    pass


# constant coefficient analysis
class IllConditioned(NumericalError):
    pass


class MultipleRoot(NumericalError):
    pass


class InvalidClass(ConfigError):
    pass


# models
class SingularMatching(NumericalError):
    pass


class SupportError(ConfigError):
    pass


# phase space / diagonalisation
class UnboundedFit(NumericalError):
    pass


class GapViolation(NumericalError):
    pass


class FrameDiscontinuity(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class ZoneViolation(NumericalError):
    pass


# propagation
class StepUnderflow(NumericalError):
    pass


class TailTooLarge(NumericalError):
    pass


# floquet
class SequenceError(ConfigError):
    pass


class NoInstability(NumericalError):
    pass


# dissipative
class EquivalenceFailure(NumericalError):
    pass


# geometry
class NewtonFailure(NumericalError):
    pass


class FoldDetected(NumericalError):
    pass


class OrderCapExceeded(NumericalError):
    pass


class NoFiniteIndex(NumericalError):
    pass


class InsufficientRange(NumericalError):
    pass
