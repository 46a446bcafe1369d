"""Bessel, Hankel, Kummer and Tricomi functions.

Each function switches between three regimes:

* a power series for small arguments,
* a stable recurrence (Bessel) or Taylor continuation of the defining ODE
  (confluent hypergeometric) for moderate arguments, where the power series
  would lose too many digits to cancellation,
* the large-argument asymptotic expansion beyond ``asymptotic_switch``.

Only real orders are supported for Bessel functions. Kummer and Tricomi
functions accept complex parameters, which the mass model needs when
``kappa > 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import _kernels
from .errors import DomainError, NonConvergence, PoleError

__all__ = [
    "SpecFunAccuracy",
    "BesselOrder",
    "bessel_j",
    "bessel_y",
    "bessel_jp",
    "bessel_yp",
    "hankel",
    "kummer_phi",
    "kummer_phi_pair",
    "tricomi_psi",
    "tricomi_psi_pair",
    "gamma",
    "rgamma",
    "loggamma",
    "digamma",
]

_SERIES_REGION = 4.0      # |argument| below which plain power series are used
_KUMMER_SMALL = 8.0       # Kummer series region when Re z >= 0
_TRICOMI_SMALL = 4.0


@dataclass(frozen=True)
class SpecFunAccuracy:
    """Accuracy controls shared by all special functions."""

    rel_tol: float = 1e-14
    series_max_terms: int = 600
    asymptotic_switch: float = 20.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.series_max_terms < 1:
            raise ValueError("series_max_terms must be >= 1")
        if not self.asymptotic_switch > 0:
            raise ValueError("asymptotic_switch must be positive")

    @property
    def confluent_switch(self) -> float:
        # The Tricomi expansion error is about exp(-|z|); three times the
        # Bessel switch keeps it below double precision.
        return 3.0 * self.asymptotic_switch


DEFAULT_ACCURACY = SpecFunAccuracy()


@dataclass(frozen=True)
class BesselOrder:
    """A real Bessel order with integer detection."""

    value: float

    @property
    def is_integer(self) -> bool:
        return abs(self.value - round(self.value)) <= 1e-12

    @property
    def nearest_integer(self) -> int:
        return int(round(self.value))


def _order(rho) -> BesselOrder:
    return rho if isinstance(rho, BesselOrder) else BesselOrder(float(rho))


# ---------------------------------------------------------------------------
# gamma-type helpers

_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
)


def _is_nonpos_int(z) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def loggamma(z) -> complex:
    """log Gamma(z) for complex z (Lanczos, g = 7); branch is irrelevant to exp."""
    z = complex(z)
    if z.real < 0.5:
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - loggamma(1.0 - z)
    z -= 1.0
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z + i)
    t = z + 7.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma(z):
    if isinstance(z, complex) and z.imag != 0.0:
        return cmath.exp(loggamma(z))
    x = float(z.real if isinstance(z, complex) else z)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(z):
    """1/Gamma(z), zero at the poles."""
    if _is_nonpos_int(z):
        return 0.0
    if isinstance(z, complex) and z.imag != 0.0:
        return cmath.exp(-loggamma(z))
    x = float(z.real if isinstance(z, complex) else z)
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def digamma(z):
    """psi(z) for real or complex z away from the poles."""
    is_real = not (isinstance(z, complex) and z.imag != 0.0)
    z = complex(z)
    if _is_nonpos_int(z):
        raise PoleError(f"digamma has a pole at {z.real}")
    if z.real < 0.5:
        val = digamma(1.0 - z) - math.pi / cmath.tan(math.pi * z)
        return val.real if is_real else val
    acc = 0.0j
    while z.real < 10.0:
        acc -= 1.0 / z
        z += 1.0
    w = 1.0 / (z * z)
    ser = w * (-1 / 12 + w * (1 / 120 + w * (-1 / 252 + w * (1 / 240 + w * (-1 / 132)))))
    val = acc + cmath.log(z) - 0.5 / z + ser
    return val.real if is_real else val


# ---------------------------------------------------------------------------
# Bessel functions

def _hankel_asymptotic(rho: float, x: float, sign: int, acc: SpecFunAccuracy):
    """Large-argument expansion; returns None if it cannot reach rel_tol."""
    mu4 = 4.0 * rho * rho
    ik = 1j * sign
    term = 1.0 + 0.0j
    s = 1.0 + 0.0j
    prev = float("inf")
    for k in range(1, acc.series_max_terms):
        term *= ik * (mu4 - (2 * k - 1) ** 2) / (8.0 * k * x)
        a = abs(term)
        if a == 0.0:
            break
        if a > prev:
            return None
        s += term
        prev = a
        if a <= acc.rel_tol * abs(s) * 0.1:
            break
    else:
        return None
    phase = x - 0.5 * rho * math.pi - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * cmath.exp(1j * sign * phase) * s


def _j_series(rho: float, x: float, acc: SpecFunAccuracy) -> float:
    s, used = _kernels.bessel_series(rho, x, acc.series_max_terms, acc.rel_tol * 0.01)
    if used >= acc.series_max_terms:
        raise NonConvergence(f"Bessel series for order {rho} at {x} did not converge")
    return (0.5 * x) ** rho * rgamma(rho + 1.0) * s


def _j_recurrence(rho: float, x: float) -> float:
    m = math.floor(rho)
    nu = rho - m
    if nu > 1.0 - 1e-12:
        nu, m = 0.0, m + 1
    elif nu < 1e-12:
        nu = 0.0
    if m >= 0:
        return float(_kernels.miller_j(nu, x, m + 1)[m])
    vals = _kernels.miller_j(nu, x, 2)
    j0, j1 = float(vals[0]), float(vals[1])
    order = nu
    # downward recurrence J_{v-1} = (2v/x) J_v - J_{v+1}
    for _ in range(-m):
        j0, j1 = 2.0 * order / x * j0 - j1, j0
        order -= 1.0
    return j0


def bessel_j(rho, tau: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """J_rho(tau) for real order rho and tau >= 0."""
    order = _order(rho)
    x = float(tau)
    if x < 0:
        raise DomainError("bessel_j requires tau >= 0")
    if order.is_integer and order.nearest_integer < 0:
        n = -order.nearest_integer
        return (-1) ** n * bessel_j(n, x, acc)
    r = float(order.nearest_integer) if order.is_integer else order.value
    if x == 0.0:
        if r == 0.0:
            return 1.0
        if r > 0:
            return 0.0
        raise DomainError("J of negative non-integer order is singular at 0")
    if x >= acc.asymptotic_switch:
        h = _hankel_asymptotic(r, x, 1, acc)
        if h is not None:
            return h.real
    if x <= _SERIES_REGION:
        return _j_series(r, x, acc)
    return _j_recurrence(r, x)


def _y_integer_small(n: int, x: float, acc: SpecFunAccuracy) -> float:
    """Log-plus-entire decomposition of Y_n for small x."""
    half = 0.5 * x
    q = half * half
    finite = 0.0
    if n > 0:
        term = 0.0
        for k in range(n):
            term = math.factorial(n - k - 1) / math.factorial(k) * q ** k
            finite += term
        finite *= -(half ** -n) / math.pi
    logpart = 2.0 / math.pi * math.log(half) * bessel_j(n, x, acc)
    s = 0.0
    term = 1.0 / math.factorial(n)
    psi_a = digamma(1.0)
    psi_b = digamma(n + 1.0)
    for k in range(acc.series_max_terms):
        if k > 0:
            term *= -q / (k * (n + k))
            psi_a += 1.0 / k
            psi_b += 1.0 / (n + k)
        contrib = (psi_a + psi_b) * term
        s += contrib
        if abs(contrib) <= acc.rel_tol * 0.01 * max(abs(s), 1e-300) and k > 2:
            break
    else:
        raise NonConvergence("Y_n series did not converge")
    entire = -(half ** n) / math.pi * s
    return finite + logpart + entire


def _y_integer_neumann(n: int, x: float) -> float:
    """Y_n from a Neumann series in integer-order J values (moderate x)."""
    big = n + 2 * int(x + 30 + 2 * math.sqrt(x))
    js = _kernels.miller_j(0.0, x, big + 1)
    half = 0.5 * x
    first = 0.0
    if n > 0:
        for k in range(n):
            first += half ** k * js[k] / (math.factorial(k) * (n - k))
        first *= -math.factorial(n) * half ** -n / math.pi
    middle = 2.0 / math.pi * (math.log(half) - digamma(n + 1.0)) * js[n]
    tail = 0.0
    k = 1
    while n + 2 * k <= big:
        tail += (-1) ** k * (n + 2 * k) * js[n + 2 * k] / (k * (n + k))
        k += 1
    return first + middle - 2.0 / math.pi * tail


def bessel_y(n, tau: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """Y_n(tau), tau > 0. Integer orders use the log-plus-entire decomposition."""
    order = _order(n)
    x = float(tau)
    if x <= 0:
        raise DomainError("bessel_y requires tau > 0")
    if order.is_integer:
        m = order.nearest_integer
        if m < 0:
            return (-1) ** (-m) * bessel_y(-m, x, acc)
        if x >= acc.asymptotic_switch:
            h = _hankel_asymptotic(float(m), x, 1, acc)
            if h is not None:
                return h.imag
        if x <= _SERIES_REGION:
            return _y_integer_small(m, x, acc)
        return _y_integer_neumann(m, x)
    r = order.value
    if x >= acc.asymptotic_switch:
        h = _hankel_asymptotic(r, x, 1, acc)
        if h is not None:
            return h.imag
    jp = bessel_j(r, x, acc)
    jm = bessel_j(-r, x, acc)
    return (jp * math.cos(r * math.pi) - jm) / math.sin(r * math.pi)


def bessel_jp(rho, tau: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """Derivative J'_rho(tau) = (J_{rho-1} - J_{rho+1}) / 2."""
    r = _order(rho).value
    return 0.5 * (bessel_j(r - 1.0, tau, acc) - bessel_j(r + 1.0, tau, acc))


def bessel_yp(rho, tau: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    r = _order(rho).value
    return 0.5 * (bessel_y(r - 1.0, tau, acc) - bessel_y(r + 1.0, tau, acc))


def hankel(rho, tau: float, sign: int = 1, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> complex:
    """H^{+}_rho = J + iY (sign=+1) or H^{-}_rho = J - iY (sign=-1), principal branch."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    order = _order(rho)
    x = float(tau)
    if x <= 0:
        raise DomainError("hankel requires tau > 0")
    r = float(order.nearest_integer) if order.is_integer else order.value
    if x >= acc.asymptotic_switch:
        h = _hankel_asymptotic(r, x, sign, acc)
        if h is not None:
            return h
    return complex(bessel_j(r, x, acc), sign * bessel_y(r, x, acc))


# ---------------------------------------------------------------------------
# confluent hypergeometric functions

def _cplx(v):
    v = complex(v)
    return v.real if v.imag == 0.0 else v


def _phi_series(a, b, z, acc, max_terms=None):
    s, used = _kernels.kummer_series(complex(a), complex(b), complex(z),
                                     max_terms or acc.series_max_terms, acc.rel_tol * 0.01)
    if max_terms is None and used >= acc.series_max_terms:
        raise NonConvergence("Kummer series did not converge")
    return s


def _asym_sums(a, b, z, acc):
    """The two asymptotic sums; returns (S1, S2) or raises NonConvergence."""
    out = []
    for p, q, arg in ((a, a - b + 1.0, -z), (1.0 - a, b - a, z)):
        term = 1.0 + 0.0j
        s = 1.0 + 0.0j
        prev = float("inf")
        ok = False
        for k in range(acc.series_max_terms):
            term *= (p + k) * (q + k) / ((k + 1.0) * arg)
            m = abs(term)
            if m == 0.0:
                ok = True
                break
            if m > prev:
                break
            s += term
            prev = m
            if m <= acc.rel_tol * 0.01 * abs(s):
                ok = True
                break
        if not ok:
            raise NonConvergence("confluent asymptotic expansion did not converge")
        out.append(s)
    return out


def _phi_asymptotic(a, b, z, acc):
    s1, s2 = _asym_sums(a, b, z, acc)
    sgn = 1.0 if cmath.phase(z) >= 0 else -1.0
    first = cmath.exp(sgn * 1j * math.pi * a) * cmath.exp(-a * cmath.log(z)) * rgamma(b - a) * s1
    second = cmath.exp(z + (a - b) * cmath.log(z)) * rgamma(a) * s2
    return gamma(b) * (first + second)


def _psi_asymptotic(a, b, z, acc):
    s1, _ = _asym_sums(a, b, z, acc)
    return cmath.exp(-a * cmath.log(z)) * s1


def _check_b(b):
    if _is_nonpos_int(b):
        raise PoleError(f"Kummer function undefined for b = {complex(b).real}")


def kummer_phi_pair(a, b, z, acc: SpecFunAccuracy = DEFAULT_ACCURACY):
    """(Phi(a,b;z), Phi'(a,b;z))."""
    _check_b(b)
    z = complex(z)
    if z == 0:
        return 1.0 + 0j, complex(a) / complex(b)
    if _is_nonpos_int(a):
        m = int(-complex(a).real)
        val = _phi_series(a, b, z, acc, max_terms=m + 2)
        der = 0.0j if m == 0 else complex(a) / complex(b) * _phi_series(a + 1, b + 1, z, acc, max_terms=m + 1)
        return val, der
    if z.real < 0:
        # Kummer transformation keeps the series free of cancellation
        v, d = kummer_phi_pair(b - a, b, -z, acc)
        e = cmath.exp(z)
        return e * v, e * (v - d)
    r = abs(z)
    ratio = complex(a) / complex(b)
    if r <= _KUMMER_SMALL:
        return _phi_series(a, b, z, acc), ratio * _phi_series(a + 1, b + 1, z, acc)
    if r >= acc.confluent_switch:
        return _phi_asymptotic(a, b, z, acc), ratio * _phi_asymptotic(a + 1, b + 1, z, acc)
    z0 = z * (_KUMMER_SMALL / r)
    w0 = _phi_series(a, b, z0, acc)
    d0 = ratio * _phi_series(a + 1, b + 1, z0, acc)
    return _kernels.kummer_walk(complex(a), complex(b), z0, w0, d0, z, 2.0, 80)


def kummer_phi(a, b, z, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> complex:
    """Kummer's function Phi(a,b;z) = sum (a)_k z^k / ((b)_k k!)."""
    return kummer_phi_pair(a, b, z, acc)[0]


def _is_int_param(b) -> bool:
    b = complex(b)
    return b.imag == 0.0 and abs(b.real - round(b.real)) <= 1e-12


def _psi_small(a, b, z, acc):
    """Tricomi function near the origin from its connection formulas."""
    if _is_int_param(b):
        nb = int(round(complex(b).real))
        if nb <= 0:
            return cmath.exp((1 - nb) * cmath.log(z)) * _psi_small(a - nb + 1, 2 - nb, z, acc)
        n = nb - 1
        logz = cmath.log(z)
        total = 0.0j
        ra = rgamma(a - n)
        if ra != 0.0:
            term = 1.0 + 0.0j
            psi_a = digamma(complex(a)) if complex(a).imag else digamma(complex(a).real)
            psi_1 = digamma(1.0)
            psi_n = digamma(n + 1.0)
            s = 0.0j
            for k in range(acc.series_max_terms):
                if k > 0:
                    term *= (a + k - 1) * z / ((n + k) * k)
                    psi_a += 1.0 / (a + k - 1)
                    psi_1 += 1.0 / k
                    psi_n += 1.0 / (n + k)
                contrib = term * (logz + psi_a - psi_1 - psi_n)
                s += contrib
                if abs(contrib) <= acc.rel_tol * 0.01 * abs(s) and k > 2:
                    break
            else:
                raise NonConvergence("Tricomi log series did not converge")
            total += (-1) ** (n + 1) / math.factorial(n) * ra * s
        if n > 0:
            fin = 0.0j
            for k in range(1, n + 1):
                poch = 1.0 + 0.0j
                for i in range(n - k):
                    poch *= (1 - a + k + i)
                fin += math.factorial(k - 1) * poch / math.factorial(n - k) * z ** (-k)
            total += rgamma(a) * fin
        return total
    first = gamma(1 - b) * rgamma(a - b + 1) * _phi_series(a, b, z, acc)
    second = gamma(b - 1) * rgamma(a) * cmath.exp((1 - b) * cmath.log(z)) * _phi_series(a - b + 1, 2 - b, z, acc)
    return first + second


def tricomi_psi_pair(a, b, z, acc: SpecFunAccuracy = DEFAULT_ACCURACY):
    """(Psi(a,b;z), Psi'(a,b;z)) with Psi' = -a Psi(a+1,b+1;z)."""
    z = complex(z)
    if z == 0:
        raise DomainError("Tricomi function is singular at z = 0")
    if z.imag == 0.0 and z.real < 0:
        raise DomainError("z on the branch cut of the Tricomi function")
    if _is_nonpos_int(a):
        m = int(-complex(a).real)
        poch = 1.0 + 0.0j
        for i in range(m):
            poch *= (b + i)
        v, d = kummer_phi_pair(a, b, z, acc)
        return (-1) ** m * poch * v, (-1) ** m * poch * d
    r = abs(z)
    big = acc.confluent_switch
    if r >= big:
        return _psi_asymptotic(a, b, z, acc), -a * _psi_asymptotic(a + 1, b + 1, z, acc)
    if r <= _TRICOMI_SMALL:
        return _psi_small(a, b, z, acc), -a * _psi_small(a + 1, b + 1, z, acc)
    if z.real >= 0:
        # walk inward from the asymptotic region: the Phi-type component
        # that would contaminate Psi decays in this direction
        zf = z * (big / r)
        w0 = _psi_asymptotic(a, b, zf, acc)
        d0 = -a * _psi_asymptotic(a + 1, b + 1, zf, acc)
        return _kernels.kummer_walk(complex(a), complex(b), zf, w0, d0, z, 2.0, 80)
    zs = z * (_TRICOMI_SMALL / r)
    w0 = _psi_small(a, b, zs, acc)
    d0 = -a * _psi_small(a + 1, b + 1, zs, acc)
    return _kernels.kummer_walk(complex(a), complex(b), zs, w0, d0, z, 2.0, 80)


def tricomi_psi(a, b, z, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> complex:
    """Tricomi's function Psi(a,b;z), principal branch."""
    return tricomi_psi_pair(a, b, z, acc)[0]
