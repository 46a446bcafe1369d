"""Numerical experiments for time-dependent hyperbolic equations.

Exact Fourier-multiplier solutions, diagonalisation hierarchies, Floquet
resonance, diffusion phenomena and contact-index dispersive decay.
"""
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
