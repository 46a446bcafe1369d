"""Diagonalisation of strictly hyperbolic first-order systems D_t U = A(t, xi) U.

Conventions: D_t = -i d/dt, eigenvalues of the principal part sorted
ascending, eigenvectors of unit length with one fixed component made positive
real. The hierarchy is built from the operator identity

    B_k = D_t N_k - (D + R_0) N_k + N_k (D + F_{k-1}),

starting from B_0 = -R_0. Each step removes the leading off-diagonal part:

    F^(k) = -diag B_k,   N^(k+1)_ij = (B_k)_ij / (lambda_i - lambda_j),

and the new remainder is R_k = -N_k^{-1} B_k. All t-derivatives of
constructed matrices are central differences with one Richardson level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, FrameDiscontinuity, GapViolation, QuadratureFailure
from .phasespace import ZoneConfig, t_xi

__all__ = [
    "SystemSymbol",
    "EigenFrame",
    "Hierarchy",
    "GECReport",
    "wave_system",
    "damped_wave_system",
    "variable_speed_system",
    "constant_system",
    "eigen_frame",
    "projection_product",
    "step0",
    "hierarchy_step",
    "zone_entry",
    "certify_zone",
    "gec_test",
]


@dataclass
class SystemSymbol:
    """Full symbol A(t, xi) and its homogeneous principal part A_1(t, xi)."""

    full: Callable[[float, float], np.ndarray]
    principal: Callable[[float, float], np.ndarray]
    d: int
    hyperbolicity_gap: float = 0.0

    def check_homogeneity(self, t: float, xi: float, rhos=(2.0, 10.0), tol: float = 1e-8) -> bool:
        a = np.asarray(self.principal(t, xi))
        scale = 1.0 + np.linalg.norm(a)
        return all(np.linalg.norm(np.asarray(self.principal(t, r * xi)) - r * a) <= tol * r * scale
                   for r in rhos)


def wave_system() -> SystemSymbol:
    a = lambda t, xi: np.array([[0.0, xi], [xi, 0.0]], dtype=complex)
    return SystemSymbol(a, a, 2, 2.0)


def damped_wave_system(b: Callable[[float], float]) -> SystemSymbol:
    """u_tt - Lap u + 2 b(t) u_t = 0 for (|xi| u, D_t u)."""
    full = lambda t, xi: np.array([[0.0, xi], [xi, 2j * b(t)]], dtype=complex)
    principal = lambda t, xi: np.array([[0.0, xi], [xi, 0.0]], dtype=complex)
    return SystemSymbol(full, principal, 2, 2.0)


def variable_speed_system(a: Callable[[float], float], da: Optional[Callable[[float], float]] = None,
                          ) -> SystemSymbol:
    """u_tt - a(t)^2 Lap u = 0 for (a(t)|xi| u, D_t u).

    ``da`` is d/dt a; a central difference is used when omitted.
    """
    if da is None:
        da = lambda t: (a(t + 1e-5) - a(t - 1e-5)) / 2e-5
    gap = 2.0 * min(a(t) for t in np.linspace(0.0, 50.0, 501))

    def full(t, xi):
        at = a(t)
        return np.array([[-1j * da(t) / at, at * xi], [at * xi, 0.0]], dtype=complex)

    def principal(t, xi):
        at = a(t)
        return np.array([[0.0, at * xi], [at * xi, 0.0]], dtype=complex)

    return SystemSymbol(full, principal, 2, gap)


def constant_system(A1: np.ndarray, A0: Optional[np.ndarray] = None, gap: float = 0.0) -> SystemSymbol:
    """A(t, xi) = xi A1 + A0 with constant matrices."""
    A1 = np.asarray(A1, dtype=complex)
    A0 = np.zeros_like(A1) if A0 is None else np.asarray(A0, dtype=complex)
    return SystemSymbol(lambda t, xi: xi * A1 + A0, lambda t, xi: xi * A1, A1.shape[0], gap)


# ---------------------------------------------------------------------------
# eigenframes

@dataclass
class EigenFrame:
    lambdas: np.ndarray
    M: np.ndarray
    M_inv: np.ndarray
    P: List[np.ndarray]
    H: np.ndarray
    gauge: Tuple[int, ...]


def _gauge_indices(V: np.ndarray) -> Tuple[int, ...]:
    out = []
    for j in range(V.shape[1]):
        mod = np.abs(V[:, j])
        out.append(int(np.flatnonzero(mod >= mod.max() * (1 - 1e-8))[0]))
    return tuple(out)


def eigen_frame(sys: SystemSymbol, t: float, xi: float,
                gauge: Optional[Sequence[int]] = None) -> EigenFrame:
    """Sorted eigenvalues and gauge-fixed unit eigenvectors of A_1(t, xi)."""
    if xi == 0:
        raise ConfigError("eigen_frame needs xi != 0")
    A1 = np.asarray(sys.principal(t, xi), dtype=complex)
    w, V = np.linalg.eig(A1)
    order = np.argsort(w.real)
    lam = w.real[order]
    V = V[:, order]
    gaps = np.diff(lam)
    if len(gaps) and gaps.min() < 0.5 * sys.hyperbolicity_gap * abs(xi):
        raise GapViolation(f"eigenvalue gap {gaps.min():.3e} below {0.5 * sys.hyperbolicity_gap * abs(xi):.3e}")
    V = V / np.linalg.norm(V, axis=0)
    g = _gauge_indices(V) if gauge is None else tuple(gauge)
    for j, i in enumerate(g):
        c = V[i, j]
        if c == 0:
            raise FrameDiscontinuity(f"gauge component {i} of eigenvector {j} vanishes")
        V[:, j] *= abs(c) / c
    Minv = np.linalg.inv(V)
    P = [np.outer(V[:, j], Minv[j]) for j in range(len(lam))]
    H = sum(p.conj().T @ p for p in P)
    return EigenFrame(lam, V, Minv, P, H, g)


def projection_product(A1: np.ndarray, lambdas: np.ndarray, j: int) -> np.ndarray:
    """P_j = prod_{i != j} (A_1 - lambda_i) / (lambda_j - lambda_i)."""
    d = len(lambdas)
    P = np.eye(d, dtype=complex)
    for i in range(d):
        if i != j:
            P = P @ (A1 - lambdas[i] * np.eye(d)) / (lambdas[j] - lambdas[i])
    return P


def _richardson(f, t, h):
    d1 = (f(t + h) - f(t - h)) / (2 * h)
    d2 = (f(t + h / 2) - f(t - h / 2)) / h
    return (4 * d2 - d1) / 3


# ---------------------------------------------------------------------------
# hierarchy

class Hierarchy:
    """Diagonalisation hierarchy of depth ``depth`` for one system.

    Evaluations are cached per (level, t, xi); the eigenvector gauge is fixed
    per xi at ``gauge_time`` so frames vary smoothly along every t-line.
    """

    def __init__(self, system: SystemSymbol, depth: int = 2, zone_c: float = 1.0,
                 fd_step: float = 1e-2, gauge_time: float = 0.0):
        if not 0 <= depth <= 4:
            raise ConfigError("hierarchy depth is capped at 4")
        self.system = system
        self.depth = depth
        self.zone_c = zone_c
        self.fd_step = fd_step
        self.gauge_time = gauge_time
        self._gauges: Dict[float, Tuple[int, ...]] = {}
        self._cache: Dict[tuple, object] = {}

    # -- frames --------------------------------------------------------
    def _gauge(self, xi):
        g = self._gauges.get(xi)
        if g is None:
            g = eigen_frame(self.system, self.gauge_time, xi).gauge
            self._gauges[xi] = g
        return g

    def _memo(self, key, fn):
        v = self._cache.get(key)
        if v is None:
            if len(self._cache) > 200000:
                self._cache.clear()
            v = fn()
            self._cache[key] = v
        return v

    def frame(self, t: float, xi: float) -> EigenFrame:
        return self._memo(("frame", t, xi), lambda: eigen_frame(self.system, t, xi, self._gauge(xi)))

    def step_size(self, t: float) -> float:
        return self.fd_step * (1.0 + abs(t))

    def R0(self, t: float, xi: float) -> np.ndarray:
        return self._memo(("R0", t, xi), lambda: self._R0(t, xi))

    def _R0(self, t, xi):
        fr = self.frame(t, xi)
        h = self.step_size(t)
        jump = np.linalg.norm(self.frame(t + h, xi).M - fr.M, 2)
        if jump > 0.5:
            raise FrameDiscontinuity(f"eigenframe jumps by {jump:.2f} near t={t}")
        dMinv = -1j * _richardson(lambda s: self.frame(s, xi).M_inv, t, h)
        A = np.asarray(self.system.full(t, xi), dtype=complex)
        A1 = np.asarray(self.system.principal(t, xi), dtype=complex)
        return fr.M_inv @ (A - A1) @ fr.M + dMinv @ fr.M

    def D(self, t: float, xi: float) -> np.ndarray:
        return np.diag(self.frame(t, xi).lambdas).astype(complex)

    def _offdiag_quotient(self, B, lam):
        d = len(lam)
        N = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                if i != j:
                    N[i, j] = B[i, j] / (lam[i] - lam[j])
        return N

    def new_N(self, k: int, t: float, xi: float) -> np.ndarray:
        """N^(k), k >= 1."""
        B = self.level(k - 1, t, xi)[2]
        return self._offdiag_quotient(B, self.frame(t, xi).lambdas)

    def level(self, k: int, t: float, xi: float):
        """(N^(1..k), F^(0..k-1), B_k) at (t, xi)."""
        return self._memo(("level", k, t, xi), lambda: self._level(k, t, xi))

    def _level(self, k, t, xi):
        if k == 0:
            return [], [], -self.R0(t, xi)
        Ns, Fs, Bp = self.level(k - 1, t, xi)
        d = self.system.d
        Fk = np.diag(-np.diag(Bp))
        Nk = self.new_N(k, t, xi)
        h = self.step_size(t)
        dNk = -1j * _richardson(lambda s: self.new_N(k, s, xi), t, h)
        Nprev = np.eye(d, dtype=complex) + sum(Ns, np.zeros((d, d), dtype=complex))
        Ftot = sum(Fs, np.zeros((d, d), dtype=complex)) + Fk
        D = self.D(t, xi)
        R0 = self.R0(t, xi)
        Bk = Bp + Nprev @ Fk + dNk - (D + R0) @ Nk + Nk @ (D + Ftot)
        return Ns + [Nk], Fs + [Fk], Bk

    # -- assembled quantities at the configured depth -------------------
    def N(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        k = self.depth if k is None else k
        Ns = self.level(k, t, xi)[0]
        return np.eye(self.system.d, dtype=complex) + sum(Ns, np.zeros((self.system.d,) * 2, dtype=complex))

    def F(self, j: int, t: float, xi: float) -> np.ndarray:
        return self.level(j + 1, t, xi)[1][j]

    def F_total(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        k = self.depth if k is None else k
        Fs = self.level(k, t, xi)[1]
        return sum(Fs, np.zeros((self.system.d,) * 2, dtype=complex))

    def B(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        return self.level(self.depth if k is None else k, t, xi)[2]

    def remainder(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        """R_k = -N_k^{-1} B_k."""
        k = self.depth if k is None else k
        return -np.linalg.solve(self.N(t, xi, k), self.B(t, xi, k))

    def diagonal_generator(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        """D + F_{k-1}."""
        return self.D(t, xi) + self.F_total(t, xi, k)

    def reduced_generator(self, t: float, xi: float, k: Optional[int] = None) -> np.ndarray:
        """D + F_{k-1} + R_k, the generator after k steps."""
        return self.diagonal_generator(t, xi, k) + self.remainder(t, xi, k)

    def conjugation_residual(self, t: float, xi: float, k: Optional[int] = None,
                             step_factor: float = 2.0) -> float:
        """|| (D_t - D - R_0) N_k - N_k (D_t - D - F_{k-1} - R_k) ||.

        D_t N_k uses a step ``step_factor`` times the construction step, so
        the check is independent of the differences used to build B_k.
        """
        k = self.depth if k is None else k
        h = step_factor * self.step_size(t)
        dN = -1j * _richardson(lambda s: self.N(s, xi, k), t, h)
        Nk = self.N(t, xi, k)
        D = self.D(t, xi)
        lhs = dN - (D + self.R0(t, xi)) @ Nk
        rhs = -Nk @ (D + self.F_total(t, xi, k) + self.remainder(t, xi, k))
        return float(np.linalg.norm(lhs - rhs, 2))


def step0(sys: SystemSymbol, t: float, xi: float, fd_step: float = 1e-2) -> np.ndarray:
    """R_0 = M^{-1}(A - A_1)M + (D_t M^{-1}) M."""
    return Hierarchy(sys, 0, fd_step=fd_step, gauge_time=t).R0(t, xi)


def hierarchy_step(h: Hierarchy, k: int, t: float, xi: float) -> dict:
    """Quantities introduced at level k+1: N^(k+1), F^(k), B_{k+1}, R_{k+1}."""
    Ns, Fs, B = h.level(k + 1, t, xi)
    return {"N": Ns[-1], "F": Fs[-1], "B": B, "R": h.remainder(t, xi, k + 1)}


def zone_entry(h: Hierarchy, xi: float) -> float:
    return t_xi(abs(xi), ZoneConfig(h.zone_c))


def certify_zone(h: Hierarchy, xis: Sequence[float], times_per_xi: int = 8,
                 t_max: float = 1e3, max_doublings: int = 12) -> float:
    """Smallest c = c_0 2^j with gap and ||N_k - I|| <= 1/2 on Z_hyp(c) samples."""
    for _ in range(max_doublings):
        ok = True
        for xi in xis:
            s = zone_entry(h, xi)
            for t in np.geomspace(1.0 + s, 1.0 + max(t_max, 2 * s + 2), times_per_xi) - 1.0:
                try:
                    if np.linalg.norm(h.N(float(t), xi) - np.eye(h.system.d), 2) > 0.5:
                        ok = False
                except GapViolation:
                    ok = False
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return h.zone_c
        h.zone_c *= 2.0
    raise GapViolation("zone constant escalation did not certify invertibility")


# ---------------------------------------------------------------------------
# generalised energy conservation

@dataclass
class GECReport:
    sup_value: float
    growth_T: np.ndarray
    growth_sup: np.ndarray
    argsup: Tuple[float, float, float]


def gec_test(F0: Callable[[float, float], np.ndarray], zone_c: float, T_max: float,
             grid: Sequence[float], t_points: int = 200, rel_tol: float = 1e-8) -> GECReport:
    """sup over (s, t, xi) in Z_hyp(c), s, t <= T_max of || int_s^t Im F0 ||.

    For each xi the primitive of Im diag F0 is tabulated on a log grid from
    the zone entry to T_max; the sup over s < t of |G(t) - G(s)| is then the
    range max G - min G of each diagonal entry.
    """
    Tgrid = np.geomspace(1.0, 1.0 + T_max, t_points) - 1.0
    growth = np.zeros(t_points)
    best, arg = 0.0, (math.nan, math.nan, math.nan)
    for xi in grid:
        s0 = t_xi(abs(xi), ZoneConfig(zone_c))
        if s0 >= T_max:
            continue
        ts = np.unique(np.concatenate([[s0], Tgrid[Tgrid > s0]]))
        d = len(np.atleast_1d(_diag(F0(ts[0], xi))))
        G = np.zeros((len(ts), d))
        for j in range(d):
            f = lambda r, j=j: float(np.imag(_diag(F0(r, xi))[j]))
            for i in range(1, len(ts)):
                val, err = quad(f, ts[i - 1], ts[i], epsrel=rel_tol, epsabs=1e-14, limit=200)
                if not np.isfinite(val):
                    raise QuadratureFailure(f"Im F0 integral failed near t={ts[i]}")
                G[i, j] = G[i - 1, j] + val
        run_max = np.maximum.accumulate(G, axis=0)
        run_min = np.minimum.accumulate(G, axis=0)
        spread = (run_max - run_min).max(axis=1)
        # running sup over t <= T on the common T grid
        idx = np.searchsorted(ts, Tgrid, side="right") - 1
        valid = idx >= 0
        growth[valid] = np.maximum(growth[valid], spread[idx[valid]])
        i_best = int(np.argmax(spread))
        if spread[i_best] > best:
            j = int(np.argmax(run_max[i_best] - run_min[i_best]))
            lo = ts[int(np.argmin(G[:i_best + 1, j]))]
            hi = ts[int(np.argmax(G[:i_best + 1, j]))]
            best, arg = float(spread[i_best]), (float(min(lo, hi)), float(max(lo, hi)), float(xi))
    return GECReport(best, Tgrid, np.maximum.accumulate(growth), arg)


def _diag(v):
    v = np.asarray(v)
    return np.diag(v) if v.ndim == 2 else np.atleast_1d(v)
