"""Fundamental matrices of D_t V = C(t, xi) V.

Three routes: adaptive Runge-Kutta integration, the diagonal exponential of
a diagonal generator, and the truncated Peano-Baker series for the
remainder after diagonalisation. Convention throughout: D_t = -i d/dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import BarycentricInterpolator

from .errors import QuadratureFailure, StepUnderflow, TailTooLarge, ZoneViolation

__all__ = [
    "FundamentalMatrix",
    "AmplitudeReport",
    "integrate_fundamental",
    "diag_exponential",
    "peano_baker",
    "hierarchy_fundamental",
    "tabulate",
    "extract_amplitudes",
]


@dataclass
class FundamentalMatrix:
    value: np.ndarray
    t: float
    s: float
    xi: float
    method: str
    est_error: float = 0.0
    weight: float = 0.0  # int ||R|| for series results

    def __matmul__(self, other: "FundamentalMatrix") -> np.ndarray:
        return self.value @ other.value


def _solve(rhs, y0, t0, t1, tol, t_eval=None, max_step=np.inf):
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol * 1e-3,
                    t_eval=t_eval, max_step=max_step)
    if sol.status != 0:
        raise StepUnderflow(f"integration from {t0} to {t1} stopped: {sol.message}")
    return sol


def integrate_fundamental(C: Callable, t: float, s: float, xi: float,
                          tol: float = 1e-10, max_step: float = np.inf) -> FundamentalMatrix:
    """E(t, s, xi) with D_t E = C(t, xi) E, E(s, s) = I, forward or backward."""
    c0 = np.asarray(C(s, xi))
    d = c0.shape[0]
    if t == s:
        return FundamentalMatrix(np.eye(d, dtype=complex), t, s, xi, "AdaptiveODE", 0.0)

    def rhs(tt, y):
        return (1j * (np.asarray(C(tt, xi)) @ y.reshape(d, d))).ravel()

    sol = _solve(rhs, np.eye(d, dtype=complex).ravel(), s, t, tol, max_step=max_step)
    val = sol.y[:, -1].reshape(d, d)
    return FundamentalMatrix(val, t, s, xi, "AdaptiveODE", tol * max(1.0, abs(t - s)))


def _diag_entries(D, tt, xi) -> np.ndarray:
    v = np.asarray(D(tt, xi))
    return np.diag(v) if v.ndim == 2 else v


def diag_exponential(D: Callable, t: float, s: float, xi: float,
                     rel_tol: float = 1e-10) -> FundamentalMatrix:
    """exp(i int_s^t D) for a diagonal generator, entry by entry."""
    d = len(_diag_entries(D, s, xi))
    phases = np.zeros(d, dtype=complex)
    err = 0.0
    for j in range(d):
        parts = []
        for part in (np.real, np.imag):
            f = lambda tt, j=j, part=part: float(part(_diag_entries(D, tt, xi)[j]))
            val, e = quad(f, s, t, epsabs=0.0, epsrel=rel_tol, limit=400)
            if not np.isfinite(val) or e > max(1e-8, 1e3 * rel_tol * abs(val)) + 1e-12:
                raise QuadratureFailure(f"phase integral of entry {j} did not converge (err {e:.2e})")
            parts.append(val)
            err += e
        phases[j] = parts[0] + 1j * parts[1]
    return FundamentalMatrix(np.diag(np.exp(1j * phases)), t, s, xi, "DiagExp", err)


def tabulate(f: Callable[[float], np.ndarray], a: float, b: float, nodes: int = 48) -> Callable:
    """Chebyshev interpolant of a smooth matrix-valued function on [a, b].

    Nodes are placed uniformly in log(1+t), which suits symbols varying on the
    scale 1+t.
    """
    lo, hi = sorted((a, b))
    ua, ub = math.log1p(lo), math.log1p(hi)
    k = np.arange(nodes)
    u = 0.5 * (ua + ub) + 0.5 * (ub - ua) * np.cos(np.pi * (k + 0.5) / nodes)
    vals = np.array([np.asarray(f(float(np.expm1(x)))) for x in u])
    shape = vals.shape[1:]
    interp = BarycentricInterpolator(u, vals.reshape(nodes, -1))

    def g(t):
        return interp(math.log1p(t)).reshape(shape)

    return g


def peano_baker(R: Callable, D: Callable, t: float, s: float, xi: float, L: int = 8,
                tol: Optional[float] = None, rtol: float = 1e-11) -> FundamentalMatrix:
    """Q(t, s, xi) = sum_{l<=L} Q_l from the Volterra iteration of D_t Q = R_E Q.

    R_E(r) = E(s, r) R(r) E(r, s) with E(r, s) = exp(i int_s^r D) for the
    diagonal generator D. All levels are integrated jointly as one augmented
    system Q_l' = i R_E Q_{l-1}, together with the phases and int ||R_E||.
    The truncation bound exp(r) - sum_{l<=L} r^l / l! is attached as
    ``est_error``.
    """
    d = len(_diag_entries(D, s, xi))
    if t == s:
        return FundamentalMatrix(np.eye(d, dtype=complex), t, s, xi, f"PeanoBaker({L})", 0.0)
    nq = d * d

    def rhs(tt, y):
        ph = y[:d]
        dia = _diag_entries(D, tt, xi)
        e = np.exp(1j * ph)
        Rt = np.asarray(R(tt, xi))
        RE = (Rt * e[None, :]) / e[:, None]
        out = np.empty_like(y)
        out[:d] = dia
        out[d] = np.linalg.norm(RE, 2)
        prev = np.eye(d, dtype=complex)
        for l in range(1, L + 1):
            out[d + 1 + (l - 1) * nq:d + 1 + l * nq] = (1j * RE @ prev).ravel()
            prev = y[d + 1 + (l - 1) * nq:d + 1 + l * nq].reshape(d, d)
        return out

    y0 = np.zeros(d + 1 + L * nq, dtype=complex)
    sol = _solve(rhs, y0, s, t, rtol)
    y = sol.y[:, -1]
    r = abs(y[d].real)
    Q = np.eye(d, dtype=complex)
    for l in range(1, L + 1):
        Q = Q + y[d + 1 + (l - 1) * nq:d + 1 + l * nq].reshape(d, d)
    tail = math.exp(r) - sum(r ** l / math.factorial(l) for l in range(L + 1))
    tail = max(tail, 0.0)
    if tol is not None and tail > tol:
        raise TailTooLarge(f"series tail bound {tail:.3e} exceeds {tol:.1e}; raise L")
    return FundamentalMatrix(Q, t, s, xi, f"PeanoBaker({L})", tail, r)


def hierarchy_fundamental(hierarchy, t: float, s: float, xi: float, L: int = 8,
                          nodes: int = 48, rtol: float = 1e-11) -> FundamentalMatrix:
    """E(t, s, xi) of the original system rebuilt from the hierarchy.

    E = M(t) N_k(t) E_k(t, s) Q_k(t, s) (M(s) N_k(s))^-1 with E_k the diagonal
    exponential of D + F_{k-1} and Q_k the Peano-Baker series for R_k. The
    symbols are tabulated once on [s, t]; both times must lie in the zone.
    """
    d = hierarchy.system.d
    if t == s:
        return FundamentalMatrix(np.eye(d, dtype=complex), t, s, xi, f"Hierarchy({L})", 0.0)
    tab = tabulate(lambda r: np.concatenate([
        hierarchy.diagonal_generator(r, xi).diagonal(),
        hierarchy.remainder(r, xi).ravel()]), s, t, nodes)
    dgen = lambda r, _x: tab(r)[:d]
    rem = lambda r, _x: tab(r)[d:].reshape(d, d)
    Ek = diag_exponential(dgen, t, s, xi, rel_tol=rtol)
    Q = peano_baker(rem, dgen, t, s, xi, L=L, rtol=rtol)
    left = hierarchy.frame(t, xi).M @ hierarchy.N(t, xi)
    right = hierarchy.frame(s, xi).M @ hierarchy.N(s, xi)
    val = left @ Ek.value @ Q.value @ np.linalg.inv(right)
    return FundamentalMatrix(val, t, s, xi, f"Hierarchy({L})", Ek.est_error + Q.est_error, Q.weight)


# ---------------------------------------------------------------------------
# large-time amplitudes

@dataclass
class AmplitudeReport:
    """Per-phase amplitudes B_j(t, xi) on a time grid.

    ``phases[i, j]`` is theta_j(t_i) = (1/t_i) int_0^{t_i} lambda_j;
    ``B[i, j]`` is the d x d matrix multiplying e^{i t_i theta_j}.
    """

    times: np.ndarray
    xi: float
    phases: np.ndarray
    B: np.ndarray
    profile_limit: np.ndarray
    residual: np.ndarray
    cauchy: float
    entry_time: float = 0.0


def extract_amplitudes(hierarchy, times: Sequence[float], xi: float,
                       entry_time: Optional[float] = None, nodes: int = 48,
                       tol: float = 1e-10) -> AmplitudeReport:
    """Split the fundamental matrix E(t, 0, xi) into oscillating parts.

    With s the zone entry time, for t >= s

        E(t, 0) = M(t) N_k(t) E_k(t, s) Q_k(t, s) N_k(s)^-1 M(s)^-1 E(s, 0)

    and E_k(t, s) = sum_j e^{i t theta_j} e_j e_j^T x (slowly varying scalar),
    so B_j collects everything except the oscillating factor.
    """
    from .diag import zone_entry

    sys = hierarchy.system
    k = hierarchy.depth
    times = np.asarray(times, dtype=float)
    s = zone_entry(hierarchy, xi) if entry_time is None else float(entry_time)
    if np.any(times < s):
        raise ZoneViolation(f"grid reaches below the zone entry time {s:.4g}")
    d = sys.d
    T = float(times[-1])

    lam = tabulate(lambda r: hierarchy.frame(r, xi).lambdas.astype(complex), s, T, nodes)
    Fk = tabulate(lambda r: np.diag(hierarchy.F_total(r, xi)), s, T, nodes)
    Rk = tabulate(lambda r: hierarchy.remainder(r, xi), s, T, nodes)
    dgen = lambda r, _x: lam(r) + Fk(r)

    # phases from 0 use the exact eigenvalues; below s they need not be smooth
    def lam_from0(r):
        return hierarchy.frame(r, xi).lambdas

    base = np.array([quad(lambda r, j=j: lam_from0(r)[j], 0.0, s, limit=200)[0]
                     for j in range(d)]) if s > 0 else np.zeros(d)

    E_pd = integrate_fundamental(sys.full, s, 0.0, xi, tol).value
    right = np.linalg.solve(hierarchy.N(s, xi), np.linalg.solve(hierarchy.frame(s, xi).M, E_pd))

    nq = d * d

    def rhs(tt, y):
        # y = [int lambda (d), int F (d), Q (d*d)]
        lv = lam(tt)
        fv = Fk(tt)
        ph = y[:d] + y[d:2 * d]
        e = np.exp(1j * ph)
        RE = (Rk(tt) * e[None, :]) / e[:, None]
        Q = y[2 * d:].reshape(d, d)
        return np.concatenate([lv, fv, (1j * RE @ Q).ravel()])

    y0 = np.concatenate([np.zeros(2 * d, dtype=complex), np.eye(d, dtype=complex).ravel()])
    grid = np.unique(np.concatenate([[s], times]))
    sol = _solve(rhs, y0, s, T, tol, t_eval=grid)
    keep = np.searchsorted(grid, times)
    B = np.zeros((len(times), d, d, d), dtype=complex)
    phases = np.zeros((len(times), d))
    for i, ii in enumerate(keep):
        t = times[i]
        y = sol.y[:, ii]
        ilam = base + y[:d].real
        phases[i] = ilam / t if t > 0 else lam_from0(t)
        slow = np.exp(1j * y[d:2 * d])
        Q = y[2 * d:].reshape(d, d)
        left = hierarchy.frame(t, xi).M @ hierarchy.N(t, xi)
        for j in range(d):
            proj = np.zeros((d, d), dtype=complex)
            proj[j, j] = slow[j] * np.exp(1j * (y[j] - ilam[j]))
            B[i, j] = left @ proj @ Q @ right
    limit = B[-1]
    half = np.searchsorted(times, T / 2.0)
    cauchy = float(np.max(np.abs(B[-1] - B[min(half, len(times) - 1)])))
    resid = np.array([[np.linalg.norm(B[i, j] - limit[j], 2) for j in range(d)]
                      for i in range(len(times))])
    return AmplitudeReport(times, xi, phases, B, limit, resid, cauchy, s)
