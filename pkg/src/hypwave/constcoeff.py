"""Constant-coefficient strictly hyperbolic operators.

An operator of order m acting on u(t, x) is stored through its Fourier symbol

    L(tau, xi) = tau^m + sum_j P_j(xi) tau^(m-j) + sum_{alpha,r} c_{alpha,r} xi^alpha tau^r,

where D_t = -i d/dt and D_x = -i grad are replaced by tau and xi. Solutions of
the Fourier-transformed equation are sums of exp(i tau_k t) times amplitudes.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import IllConditioned, InvalidClass, MultipleRoot

__all__ = [
    "HyperbolicOperatorSpec",
    "RootSet",
    "Regime",
    "DecayClass",
    "TABLE_ROWS",
    "sum_of_squares_power",
    "wave_operator",
    "damped_wave_operator",
    "operator_from_speeds",
    "char_roots",
    "root_bound",
    "amplitudes",
    "solution_multiplier",
    "discriminant",
    "discriminant_from_coeffs",
    "decay_classifier",
    "combined_rate",
]

Monomials = dict  # exponent tuple -> complex coefficient


def _eval_poly(table: Monomials, xi: np.ndarray) -> complex:
    total = 0.0j
    for expo, c in table.items():
        total += c * np.prod(xi ** np.asarray(expo, dtype=float))
    return total


def sum_of_squares_power(n: int, k: int, coeff: complex = 1.0) -> Monomials:
    """Monomial table of coeff * |xi|^(2k) in n variables."""
    out: Monomials = {}
    for combo in itertools.combinations_with_replacement(range(n), k):
        expo = [0] * n
        for i in combo:
            expo[i] += 2
        counts = [combo.count(i) for i in range(n)]
        mult = math.factorial(k)
        for c in counts:
            mult //= math.factorial(c)
        key = tuple(expo)
        out[key] = out.get(key, 0.0) + coeff * mult
    return out


@dataclass
class HyperbolicOperatorSpec:
    """Order-m operator with homogeneous principal part and constant lower terms."""

    order: int
    principal_coeffs: dict
    lower_coeffs: dict = field(default_factory=dict)
    n: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        for j, table in self.principal_coeffs.items():
            if not 1 <= j <= self.order:
                raise ValueError(f"principal index {j} outside 1..{self.order}")
            for expo in table:
                if len(expo) != self.n or sum(expo) != j:
                    raise ValueError(f"P_{j} monomial {expo} is not of degree {j} in {self.n} variables")
        for (alpha, r) in self.lower_coeffs:
            if len(alpha) != self.n or sum(alpha) + r > self.order - 1:
                raise ValueError(f"lower term {(alpha, r)} has order >= m")

    def tau_coeffs(self, xi, principal_only: bool = False) -> np.ndarray:
        """Coefficients of L(., xi) from tau^m down to tau^0."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        m = self.order
        c = np.zeros(m + 1, dtype=complex)
        c[0] = 1.0
        for j, table in self.principal_coeffs.items():
            c[j] += _eval_poly(table, xi)
        if not principal_only:
            for (alpha, r), val in self.lower_coeffs.items():
                c[m - r] += val * np.prod(xi ** np.asarray(alpha, dtype=float))
        return c


def wave_operator(n: int = 1) -> HyperbolicOperatorSpec:
    """d_t^2 - Laplacian, i.e. D_t^2 - |xi|^2."""
    return HyperbolicOperatorSpec(2, {2: sum_of_squares_power(n, 1, -1.0)}, {}, n)


def damped_wave_operator(n: int = 1) -> HyperbolicOperatorSpec:
    """u_tt - Laplacian u + u_t, i.e. tau^2 - i tau - |xi|^2."""
    return HyperbolicOperatorSpec(2, {2: sum_of_squares_power(n, 1, -1.0)},
                                  {((0,) * n, 1): -1j}, n)


def operator_from_speeds(speeds, lower=None) -> HyperbolicOperatorSpec:
    """One-dimensional operator prod_k (tau - c_k xi) plus optional lower terms."""
    speeds = list(speeds)
    m = len(speeds)
    poly = np.poly(speeds)  # tau^m + e1' tau^(m-1) + ...
    principal = {j: {(j,): complex(poly[j])} for j in range(1, m + 1) if poly[j] != 0}
    return HyperbolicOperatorSpec(m, principal, dict(lower or {}), 1)


@dataclass
class RootSet:
    roots: np.ndarray
    principal_roots: np.ndarray
    at_xi: np.ndarray
    ill_conditioned: bool = False


def _polish(coeffs: np.ndarray, z: complex, scale: float, iters: int = 60):
    dcoeffs = np.polyder(coeffs)
    target = 1e-10 * scale
    for _ in range(iters):
        val = np.polyval(coeffs, z)
        if abs(val) <= target * 1e-3:
            return z, True
        der = np.polyval(dcoeffs, z)
        if der == 0:
            return z, abs(val) <= target
        step = val / der
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z, abs(np.polyval(coeffs, z)) <= target


def _min_gap(r: np.ndarray) -> float:
    if len(r) < 2:
        return float("inf")
    return min(abs(a - b) for a, b in itertools.combinations(r, 2))


def char_roots(op: HyperbolicOperatorSpec, xi, strict: bool = False) -> RootSet:
    """Roots of L(., xi) and of its principal part, polished and matched.

    Near-multiple roots are flagged (``ill_conditioned``) with a warning; with
    ``strict=True`` they raise ``IllConditioned`` instead.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    size = 1.0 + float(np.linalg.norm(xi))
    scale = size ** op.order
    flagged = False

    full_c = op.tau_coeffs(xi)
    prin_c = op.tau_coeffs(xi, principal_only=True)
    full = []
    for z in np.roots(full_c) if op.order > 0 else []:
        z, ok = _polish(full_c, complex(z), scale)
        flagged |= not ok
        full.append(z)
    prin = []
    for z in np.roots(prin_c):
        z, ok = _polish(prin_c, complex(z), scale)
        prin.append(z)
    full = np.array(full, dtype=complex)
    prin = np.sort(np.real(np.array(prin, dtype=complex)))
    if _min_gap(full) < 1e-8 * size:
        flagged = True

    # greedy nearest matching of full roots to principal roots
    pairs = sorted(((abs(full[i] - prin[k]), i, k)
                    for i in range(op.order) for k in range(op.order)))
    used_i, used_k = set(), set()
    matched = np.zeros(op.order, dtype=complex)
    for _, i, k in pairs:
        if i in used_i or k in used_k:
            continue
        matched[k] = full[i]
        used_i.add(i)
        used_k.add(k)
    if flagged:
        if strict:
            raise IllConditioned(f"near-multiple characteristic roots at xi={xi}")
        warnings.warn(f"near-multiple characteristic roots at xi={xi}", RuntimeWarning, stacklevel=2)
    return RootSet(matched, prin, xi, flagged)


def root_bound(coeffs) -> float:
    """2 max_j |c_j|^(1/j): bounds all roots of z^m + c_1 z^(m-1) + ... + c_m."""
    m = 0.0
    for j, c in enumerate(coeffs, start=1):
        m = max(m, abs(c) ** (1.0 / j))
    return 2.0 * m


def amplitudes(roots, j: int, data: str = "derivative") -> np.ndarray:
    """Amplitudes A_j^k of the solution for the datum with index j.

    With ``data="Dt"`` the datum is D_t^j u(0) and the amplitudes are

        A_j^k = (-1)^j e_{m-j-1}(tau_l, l != k) / prod_{l != k} (tau_l - tau_k),

    e being elementary symmetric polynomials. With ``data="derivative"``
    (default) the datum is d_t^j u(0), which multiplies the above by (-i)^j.
    """
    if isinstance(roots, RootSet):
        tau = np.asarray(roots.roots, dtype=complex)
        size = 1.0 + float(np.linalg.norm(roots.at_xi))
    else:
        tau = np.asarray(roots, dtype=complex)
        size = 1.0 + float(np.max(np.abs(tau), initial=0.0))
    m = len(tau)
    if not 0 <= j < m:
        raise ValueError(f"data index {j} outside 0..{m - 1}")
    if _min_gap(tau) < 1e-8 * size:
        raise MultipleRoot("amplitudes need pairwise distinct roots")
    out = np.zeros(m, dtype=complex)
    for k in range(m):
        others = np.delete(tau, k)
        esym = 0.0j
        for combo in itertools.combinations(others, m - j - 1):
            esym += np.prod(combo) if combo else 1.0
        out[k] = (-1) ** j * esym / np.prod(others - tau[k])
    if data == "derivative":
        out *= (-1j) ** j
    elif data != "Dt":
        raise ValueError("data must be 'derivative' or 'Dt'")
    return out


def solution_multiplier(op: HyperbolicOperatorSpec, xi, t, data_coeffs, data: str = "derivative"):
    """sum_j sum_k exp(i tau_k t) A_j^k f_j for data f_0..f_{m-1}."""
    rs = char_roots(op, xi, strict=True)
    t = np.asarray(t, dtype=float)
    phases = np.exp(1j * np.multiply.outer(t, rs.roots))
    total = np.zeros(t.shape, dtype=complex)
    for j, f in enumerate(data_coeffs):
        if f != 0:
            total = total + f * (phases @ amplitudes(rs, j, data))
    return total


def discriminant_from_coeffs(p) -> complex:
    """(-1)^(m(m-1)/2) p_m^(2m-2) prod_{i<j} (x_i - x_j)^2 for p_0 + ... + p_m x^m."""
    p = np.asarray(p, dtype=complex)
    m = len(p) - 1
    if m < 1:
        return 0.0j
    x = np.roots(p[::-1])
    prod = 1.0 + 0.0j
    for a, b in itertools.combinations(x, 2):
        prod *= (a - b) ** 2
    return (-1) ** (m * (m - 1) // 2) * p[m] ** (2 * m - 2) * prod


def discriminant(op: HyperbolicOperatorSpec, xi) -> complex:
    """Discriminant of L(., xi) as a polynomial in tau."""
    c = op.tau_coeffs(xi)
    roots = char_roots(op, xi).roots if op.order > 1 else np.array([])
    prod = 1.0 + 0.0j
    for a, b in itertools.combinations(roots, 2):
        prod *= (a - b) ** 2
    m = op.order
    return (-1) ** (m * (m - 1) // 2) * c[0] ** (2 * m - 2) * prod


class Regime(str, Enum):
    AWAY = "AwayFromAxis"
    NONDEG_HESSIAN = "OnAxisNondegHessian"
    RANK_N_MINUS_1 = "OnAxisRankN-1"
    CONVEX = "OnAxisConvexGamma"
    NONCONVEX = "OnAxisNonconvexGamma0"
    MULTIPLE_AWAY = "MultipleAwayL"
    MULTIPLE_ON_AXIS = "MultipleOnAxisL"
    MEETING_AXIS = "MeetingAxisL"


_REQUIRED = {
    Regime.AWAY: ("delta",),
    Regime.NONDEG_HESSIAN: ("n", "p"),
    Regime.RANK_N_MINUS_1: ("n", "p"),
    Regime.CONVEX: ("gamma", "n", "p"),
    Regime.NONCONVEX: ("gamma0", "p"),
    Regime.MULTIPLE_AWAY: ("L", "delta"),
    Regime.MULTIPLE_ON_AXIS: ("L", "ell"),
    Regime.MEETING_AXIS: ("L", "ell", "s", "p"),
}


@dataclass
class DecayClass:
    """One row of the decay table: a regime plus the parameters it needs.

    ``part`` is "large" for frequencies away from the origin and "bounded" for
    bounded frequencies; it only changes the non-convex row.
    """

    regime: Regime
    params: dict = field(default_factory=dict)
    part: str = "bounded"

    def __post_init__(self):
        self.regime = Regime(self.regime)
        p = self.params.get("p")
        if p is not None and not 1.0 <= p <= 2.0:
            raise InvalidClass("p must lie in [1, 2]")
        for key, lo in (("gamma", 2), ("gamma0", 2), ("L", 1), ("ell", 0), ("s", 1)):
            if key in self.params and self.params[key] < lo:
                raise InvalidClass(f"{key} must be >= {lo}")

    @property
    def q(self) -> float:
        p = self.params["p"]
        return math.inf if p == 1 else p / (p - 1)


# the twelve rows: five for large frequencies, seven for bounded ones
TABLE_ROWS = (
    ("large", Regime.AWAY),
    ("large", Regime.NONDEG_HESSIAN),
    ("large", Regime.RANK_N_MINUS_1),
    ("large", Regime.CONVEX),
    ("large", Regime.NONCONVEX),
    ("bounded", Regime.AWAY),
    ("bounded", Regime.MULTIPLE_AWAY),
    ("bounded", Regime.NONDEG_HESSIAN),
    ("bounded", Regime.CONVEX),
    ("bounded", Regime.NONCONVEX),
    ("bounded", Regime.MULTIPLE_ON_AXIS),
    ("bounded", Regime.MEETING_AXIS),
)


def decay_classifier(cls: DecayClass, t: float) -> float:
    """Tabulated decay rate K(t) for one characteristic root."""
    missing = [k for k in _REQUIRED[cls.regime] if k not in cls.params]
    if missing:
        raise InvalidClass(f"{cls.regime.value} needs parameters {missing}")
    if cls.part not in ("large", "bounded"):
        raise InvalidClass("part must be 'large' or 'bounded'")
    P = cls.params
    w = 2.0 / P["p"] - 1.0 if "p" in P else None  # 1/p - 1/q
    r = cls.regime
    if r is Regime.AWAY:
        return math.exp(-P["delta"] * t)
    if r is Regime.MULTIPLE_AWAY:
        return t ** P["L"] * math.exp(-P["delta"] * t)
    if r is Regime.NONDEG_HESSIAN:
        return t ** (-(P["n"] / 2.0) * w)
    if r is Regime.RANK_N_MINUS_1:
        return t ** (-((P["n"] - 1) / 2.0) * w)
    if r is Regime.CONVEX:
        return t ** (-((P["n"] - 1) / P["gamma"]) * w)
    if r is Regime.NONCONVEX:
        if cls.part == "large":
            return t ** (-1.0 / P["gamma0"])
        return t ** (-(1.0 / P["gamma0"]) * w)
    if r is Regime.MULTIPLE_ON_AXIS:
        return t ** (P["L"] - 1 - P["ell"])
    if r is Regime.MEETING_AXIS:
        return t ** (P["L"] - 1 - (P["ell"] / P["s"]) * w)
    raise InvalidClass(str(r))  # pragma: no cover


def combined_rate(classes, t: float) -> float:
    """K(t) = max over the per-root rates."""
    return max(decay_classifier(c, t) for c in classes)
