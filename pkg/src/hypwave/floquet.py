"""Hill's equation u'' + xi^2 a(t)^2 u = 0: monodromy, instability, resonance.

Solutions are carried as (u, u') pairs; the monodromy in these variables is
similar to the one of the first-order system for (|xi| u, D_t u), so
eigenvalues, determinant and Floquet exponents agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels as K
from .errors import ConfigError, NoInstability, SequenceError

__all__ = [
    "PeriodicCoefficient",
    "MonodromyResult",
    "ResonantCoefficient",
    "InstabilityInterval",
    "GrowthReport",
    "bump",
    "monodromy",
    "propagate_hill",
    "instability_scan",
    "build_coefficient",
    "derivative_report",
    "gronwall_constant",
    "energy_growth_experiment",
    "geometric_sequences",
]

RTOL, ATOL = 1e-12, 1e-14


def bump(s, eps: float = 1.0, center: float = 0.5, halfwidth: float = 0.5):
    """eps exp(1 - 1/(1 - u^2)) with u = (s - center)/halfwidth, zero for |u| >= 1."""
    s = np.asarray(s, dtype=float)
    u = (s - center) / halfwidth
    inside = np.abs(u) < 1
    out = np.zeros_like(u)
    out[inside] = eps * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PeriodicCoefficient:
    """a(t) = 1 + eps bump(frac(n t)), period 1/n."""

    eps: float = 0.2
    center: float = 0.5
    halfwidth: float = 0.5
    n: int = 1

    def __post_init__(self):
        if not abs(self.eps) < 1:
            raise ConfigError("bump amplitude must satisfy |eps| < 1")
        if not (0 < self.halfwidth and self.center - self.halfwidth >= 0
                and self.center + self.halfwidth <= 1):
            raise ConfigError("bump must be supported in [0, 1]")
        if self.n < 1:
            raise ConfigError("compression factor must be a positive integer")

    @property
    def period(self) -> float:
        return 1.0 / self.n

    @property
    def constant(self) -> bool:
        return self.eps == 0

    def __call__(self, t: float) -> float:
        s = self.n * t
        return 1.0 + bump(s - math.floor(s), self.eps, self.center, self.halfwidth)


@dataclass
class MonodromyResult:
    M: np.ndarray
    kappa: float
    stable: bool
    eigenvalues: np.ndarray
    jordan: bool = False


_EMPTY = np.zeros(0)


def _hill(coef: PeriodicCoefficient, xi: float, t0: float, t1: float, y0, hmax: float = np.inf):
    if coef.n == 1:
        y, _ = K.hill_propagate(xi, t0, t1, np.asarray(y0, dtype=float), 0, coef.eps, coef.center,
                                coef.halfwidth, _EMPTY, _EMPTY, _EMPTY, _EMPTY, RTOL, ATOL,
                                min(hmax, 1e300))
    else:
        # generic route: the compressed coefficient is evaluated directly
        y, _ = K.dopri_hill(xi, t0, t1, list(y0), coef, RTOL, ATOL, min(hmax, 1e300))
    return np.asarray(y)


def propagate_hill(coef, xi: float, t0: float, t1: float) -> np.ndarray:
    """2x2 fundamental matrix of (u, u') from t0 to t1."""
    hmax = 0.05 * coef.period if isinstance(coef, PeriodicCoefficient) else np.inf
    y = _hill(coef, xi, t0, t1, (1.0, 0.0, 0.0, 1.0), hmax)
    return np.array([[y[0], y[2]], [y[1], y[3]]])


def monodromy(coef: PeriodicCoefficient, xi: float, tol: float = 1e-8) -> MonodromyResult:
    """M = E(period, 0, xi) and the Floquet exponent log max|eig| (>= 0)."""
    if xi <= 0:
        raise ConfigError("monodromy needs |xi| > 0")
    M = propagate_hill(coef, xi, 0.0, coef.period)
    ev = np.linalg.eigvals(M)
    tr = float(np.trace(M))
    jordan = abs(abs(tr) - 2.0) < tol
    big = float(np.max(np.abs(ev)))
    if jordan or abs(tr) <= 2.0:
        kappa, stable = 0.0, not jordan
    else:
        kappa, stable = math.log(big), False
    return MonodromyResult(M, kappa, stable, ev, jordan)


def _kappa(coef, xi):
    # from the trace, so the value is continuous across the tongue boundary
    M = propagate_hill(coef, xi, 0.0, coef.period)
    tr = abs(float(np.trace(M))) / 2.0
    return math.acosh(tr) if tr > 1.0 else 0.0


@dataclass
class InstabilityInterval:
    lo: float
    hi: float
    kappa_max: float
    argmax: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


def instability_scan(coef: PeriodicCoefficient, xi_range=(0.5, 10.0), resolution: int = 32,
                     threshold: float = 1e-6, refine: bool = True) -> List[InstabilityInterval]:
    """Maximal sampled runs of frequencies with Floquet exponent above ``threshold``.

    Interval ends are the outermost unstable samples; with ``refine`` the
    argmax is polished by a bounded scalar search between its neighbours.
    """
    if resolution < 16:
        raise ConfigError("resolution must be at least 16 points per unit")
    lo, hi = xi_range
    n = max(2, int(math.ceil((hi - lo) * resolution)) + 1)
    xs = np.linspace(lo, hi, n)
    ks = np.array([_kappa(coef, x) for x in xs])
    out = []
    i = 0
    while i < n:
        if ks[i] > threshold:
            j = i
            while j + 1 < n and ks[j + 1] > threshold:
                j += 1
            m = i + int(np.argmax(ks[i:j + 1]))
            kmax, arg = float(ks[m]), float(xs[m])
            if refine:
                a, b = xs[max(m - 1, 0)], xs[min(m + 1, n - 1)]
                res = minimize_scalar(lambda x: -_kappa(coef, x), bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-10})
                if -res.fun > kmax:
                    kmax, arg = float(-res.fun), float(res.x)
            out.append(InstabilityInterval(float(xs[i]), float(xs[j]), kmax, arg))
            i = j + 1
        else:
            i += 1
    return out


# ---------------------------------------------------------------------------
# resonant coefficients

@dataclass
class ResonantCoefficient:
    """a(t) = 1 + eta_k eps bump((n_k/delta_k)(t - tau_k)) on I_k = [tau_k, tau_k + delta_k]."""

    tau: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    nn: np.ndarray
    eps: float = 0.5
    center: float = 0.5
    halfwidth: float = 0.5

    def __call__(self, t: float) -> float:
        return K.coefficient_value(t, 1, self.eps, self.center, self.halfwidth,
                                   self.tau, self.delta, self.eta, self.nn)

    @property
    def unit_cell(self) -> PeriodicCoefficient:
        return PeriodicCoefficient(self.eps, self.center, self.halfwidth)

    def interval(self, k: int):
        return float(self.tau[k]), float(self.tau[k] + self.delta[k])


def build_coefficient(tau: Sequence[float], delta: Sequence[float], eta: Sequence[float],
                      nn: Sequence[int], eps: float = 0.5, center: float = 0.5,
                      halfwidth: float = 0.5) -> ResonantCoefficient:
    tau, delta, eta = (np.asarray(v, dtype=float) for v in (tau, delta, eta))
    nn = np.asarray(nn, dtype=float)
    if not (len(tau) == len(delta) == len(eta) == len(nn)):
        raise SequenceError("sequences must have equal length")
    if np.any(delta <= 0) or np.any(eta > 1) or np.any(nn < 1) or np.any(nn != np.round(nn)):
        raise SequenceError("need delta_k > 0, eta_k <= 1 and positive integer n_k")
    if np.any(tau[1:] <= tau[:-1] + delta[:-1]):
        raise SequenceError("intervals overlap: tau_{k+1} <= tau_k + delta_k")
    if not abs(eps) < 1:
        raise SequenceError("bump amplitude must satisfy |eps| < 1")
    return ResonantCoefficient(tau, delta, eta, nn, eps, center, halfwidth)


def geometric_sequences(sigma: float, q: float, K_: int):
    """tau_k = sigma^k, delta_k = sigma^(k-1), n_k = ceil(sigma^(qk)), eta_k = 1."""
    k = np.arange(1, K_ + 1, dtype=float)
    return sigma ** k, sigma ** (k - 1), np.ones(K_), np.ceil(sigma ** (q * k) - 1e-12)


def derivative_report(coef: ResonantCoefficient, max_l: int = 2, samples: int = 4001) -> np.ndarray:
    """C[k, l] = sup_{I_k} |a^(l)| / (eta_k (n_k/delta_k)^l), by exact bump derivatives.

    The bump derivatives are taken from a fine finite-difference table of the
    unit profile and rescaled, so the constants are those of the construction.
    """
    s = np.linspace(0.0, 1.0, samples)
    prof = bump(s, coef.eps, coef.center, coef.halfwidth)
    derivs = [prof]
    for _ in range(max_l):
        derivs.append(np.gradient(derivs[-1], s, edge_order=2))
    sup = [float(np.max(np.abs(d))) for d in derivs]
    out = np.zeros((len(coef.tau), max_l + 1))
    for k in range(len(coef.tau)):
        for l in range(max_l + 1):
            # a^(l) on I_k equals eta_k (n_k/delta_k)^l b^(l); sup over whole periods
            out[k, l] = sup[l] if l > 0 else 1.0 + sup[0]
    return out


def gronwall_constant(coef: PeriodicCoefficient, floor: Optional[float] = None,
                      step: float = 1e-3) -> float:
    """sup |b'| / (1 + b) for the bump b of a = 1 + b.

    With ``floor`` the quotient |b'| / max(b, floor) is used instead.
    """
    s = np.arange(0.0, 1.0 + step / 2, step)
    b = bump(s, coef.eps, coef.center, coef.halfwidth)
    fine = np.linspace(0.0, 1.0, 20001)
    db_f = np.gradient(bump(fine, coef.eps, coef.center, coef.halfwidth), fine, edge_order=2)
    db = np.interp(s, fine, db_f)
    den = 1.0 + b if floor is None else np.maximum(b, floor)
    return float(np.max(np.abs(db) / den))


# ---------------------------------------------------------------------------
# energy growth

@dataclass
class GrowthReport:
    xi_star: float
    kappa: float
    c: float
    c_floored: float
    n: np.ndarray
    xi: np.ndarray
    log_gain_interval: np.ndarray   # log E(tau_k+delta_k) - log E(tau_k) for u_k
    log_energy_end: np.ndarray      # log E(tau_k+delta_k) - log E(0) for u_k
    lower_bound: np.ndarray         # 2 kappa n_k - 2 c sum_{l<k} n_l
    conservation_error: float       # worst relative energy drift between intervals


def hill_energy(y, xi: float, a: float = 1.0) -> float:
    return 0.5 * (y[1] ** 2 + (xi * a * y[0]) ** 2)


def _resonant_propagator(coef: ResonantCoefficient, xi: float, t0: float, t1: float):
    """Fundamental matrix through [t0, t1], split at interval boundaries."""
    cuts = sorted({t0, t1, *[x for k in range(len(coef.tau)) for x in coef.interval(k)
                             if min(t0, t1) < x < max(t0, t1)]})
    if t1 < t0:
        cuts = cuts[::-1]
    Phi = np.eye(2)
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        inside = [k for k in range(len(coef.tau)) if coef.tau[k] <= mid <= coef.tau[k] + coef.delta[k]]
        if inside:
            k = inside[0]
            hmax = 0.02 * coef.delta[k] / coef.nn[k]
        else:
            hmax = 1e300
        y, _ = K.hill_propagate(xi, a, b, np.array([1.0, 0.0, 0.0, 1.0]), 1, coef.eps,
                                coef.center, coef.halfwidth, coef.tau, coef.delta, coef.eta,
                                coef.nn, RTOL, ATOL, hmax)
        Phi = np.array([[y[0], y[2]], [y[1], y[3]]]) @ Phi
    return Phi


def energy_growth_experiment(coef: ResonantCoefficient, K_: Optional[int] = None,
                             xi_range=(0.5, 8.0), resolution: int = 64) -> GrowthReport:
    """Energy of resonant solutions u_k, one per interval.

    u_k has frequency (n_k/delta_k) xi* with xi* the most unstable unit-cell
    frequency, and data at tau_k equal to the unstable monodromy eigenvector;
    it is integrated back to t = 0 and forward to tau_k + delta_k.
    """
    K_ = len(coef.tau) if K_ is None else K_
    cell = coef.unit_cell
    scan = instability_scan(cell, xi_range, resolution)
    if not scan:
        raise NoInstability("unit-cell coefficient shows no instability interval")
    best = max(scan, key=lambda r: r.kappa_max)
    xi_star, kappa = best.argmax, best.kappa_max
    mono = monodromy(cell, xi_star)
    w, V = np.linalg.eig(mono.M)
    v = np.real_if_close(V[:, int(np.argmax(np.abs(w)))]).real
    c = gronwall_constant(cell)
    c_floor = gronwall_constant(cell, floor=1e-12)

    gains, ends, bounds, xis = [], [], [], []
    drift = 0.0
    for k in range(K_):
        nk, dk, tk = coef.nn[k], coef.delta[k], coef.tau[k]
        xi = nk / dk * xi_star
        # data at tau_k in (u, u_t); the cell variable s = (n_k/delta_k)(t - tau_k)
        y_tau = np.array([v[0], v[1] * nk / dk])
        y0 = np.linalg.solve(_resonant_propagator(coef, xi, 0.0, tk), y_tau)
        y_end = _resonant_propagator(coef, xi, tk, tk + dk) @ y_tau
        e0, e_tau, e_end = (hill_energy(y, xi) for y in (y0, y_tau, y_end))
        gains.append(math.log(e_end / e_tau))
        ends.append(math.log(e_end / e0))
        bounds.append(2 * kappa * nk - 2 * c * float(np.sum(coef.nn[:k])))
        xis.append(xi)
        # energy must be constant between consecutive intervals (a = 1 there)
        for j in range(k):
            a_end = coef.tau[j] + coef.delta[j]
            b_start = coef.tau[j + 1]
            ya = _resonant_propagator(coef, xi, 0.0, a_end) @ y0
            yb = _resonant_propagator(coef, xi, a_end, b_start) @ ya
            ea, eb = hill_energy(ya, xi), hill_energy(yb, xi)
            drift = max(drift, abs(eb - ea) / ea)
    return GrowthReport(xi_star, kappa, c, c_floor, coef.nn[:K_].copy(), np.array(xis),
                        np.array(gains), np.array(ends), np.array(bounds), drift)
