"""Canonical Cauchy problems and their exact Fourier multipliers.

A multiplier is the 2x2 matrix taking the data (u_hat, ut_hat) at the initial
time to (u_hat, ut_hat) at time t, for one frequency magnitude |xi|. Radial
data are assumed throughout, so every grid is a list of magnitudes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import specfun as sf
from .errors import ConfigError, SingularMatching, SupportError

__all__ = [
    "ModelSpec",
    "FourierState",
    "radial_grid",
    "radial_weights",
    "profile",
    "exact_multiplier",
    "multiplier_grid",
    "evolve",
    "energy",
    "l2_norm",
    "hf_scattering_profile",
    "free_wave_evolve",
    "scattering_defect",
]

KINDS = ("FreeWave", "DampedWave", "KleinGordon", "Heat", "ScaleInvariantDissipation",
         "ScaleInvariantMass", "VariableSpeed", "WeakDissipation")


@dataclass
class ModelSpec:
    """Tagged description of a model problem.

    ``WeakDissipation`` is u_tt - Lap u + b(t) u_t = 0 with ``b`` the full
    coefficient of u_t; ``VariableSpeed`` is u_tt - a(t)^2 Lap u = 0.
    """

    kind: str
    n: int = 1
    mu: float = 0.0
    kappa: float = 0.0
    a: Optional[Callable[[float], float]] = None
    b: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("dimension must be >= 1")
        if self.mu < 0 or self.kappa < 0:
            raise ConfigError("mu and kappa must be nonnegative")
        if self.kind == "VariableSpeed" and self.a is None:
            raise ConfigError("VariableSpeed needs a(t)")
        if self.kind == "WeakDissipation" and self.b is None:
            raise ConfigError("WeakDissipation needs b(t)")

    @property
    def initial_time(self) -> float:
        return 1.0 if self.kind.startswith("ScaleInvariant") else 0.0


@dataclass
class FourierState:
    grid: np.ndarray
    u_hat: np.ndarray
    ut_hat: np.ndarray
    time: float = 0.0
    n: int = 1

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.u_hat = np.asarray(self.u_hat, dtype=complex)
        self.ut_hat = np.asarray(self.ut_hat, dtype=complex)
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise ConfigError("radial grid must be strictly increasing")
        if not (np.all(np.isfinite(self.u_hat)) and np.all(np.isfinite(self.ut_hat))):
            raise ConfigError("state values must be finite")


def radial_grid(points: int = 256, lo: float = 1e-3, hi: float = 50.0) -> np.ndarray:
    """Log-spaced magnitudes."""
    return np.geomspace(lo, hi, points)


def radial_weights(grid, n: int = 1) -> np.ndarray:
    """Trapezoid weights times the surface measure |S^{n-1}| r^{n-1}."""
    r = np.asarray(grid, dtype=float)
    w = np.zeros_like(r)
    d = np.diff(r)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    sphere = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    return w * sphere * r ** (n - 1)


def _smooth_bump(x, lo, hi):
    u = (2 * np.asarray(x, dtype=float) - lo - hi) / (hi - lo)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def profile(kind: str, grid, **params) -> np.ndarray:
    """Radial data profiles in Fourier variables.

    ``gaussian``: exp(-width |xi|^2); ``annulus``: smooth bump on [lo, hi];
    ``constant``: value everywhere.
    """
    grid = np.asarray(grid, dtype=float)
    if kind == "gaussian":
        return np.exp(-params.get("width", 1.0) * grid ** 2).astype(complex)
    if kind == "annulus":
        return _smooth_bump(grid, params.get("lo", 1.0), params.get("hi", 4.0)).astype(complex)
    if kind == "constant":
        return np.full(grid.shape, params.get("value", 1.0), dtype=complex)
    raise ConfigError(f"unknown profile {kind!r}")


# ---------------------------------------------------------------------------
# constant-coefficient second-order multipliers

def _const_propagator(damp: float, stiff: float, t: float) -> np.ndarray:
    """exp(t [[0,1],[-stiff,-damp]]) without overflow for large t."""
    nu2 = 0.25 * damp * damp - stiff
    h = 0.5 * damp
    if nu2 < 0:
        om = math.sqrt(-nu2)
        e = math.exp(-h * t)
        C = e * math.cos(om * t)
        S = e * math.sin(om * t) / om
    elif nu2 > 0:
        nu = math.sqrt(nu2)
        grow = math.exp((nu - h) * t)
        fast = math.exp(-(nu + h) * t)
        C = 0.5 * (grow + fast)
        S = grow * (-math.expm1(-2 * nu * t)) / (2 * nu)
    else:
        C = math.exp(-h * t)
        S = t * C
    return np.array([[C + h * S, S], [-stiff * S, C - h * S]], dtype=complex)


# ---------------------------------------------------------------------------
# scale-invariant models

def _sid_system(mu: float, s: float, xi: float, acc):
    """Fundamental system of u'' + (2mu/t) u' + xi^2 u = 0 at t = s/xi."""
    rho = 0.5 - mu
    order = sf.BesselOrder(rho)
    sr = s ** rho
    if order.is_integer:
        r = float(order.nearest_integer)
        f1 = sr * sf.bessel_j(-r, s, acc)
        f2 = sr * sf.bessel_y(-r, s, acc)
        d1 = -sr * sf.bessel_j(1 - r, s, acc)
        d2 = -sr * sf.bessel_y(1 - r, s, acc)
    else:
        f1 = sr * sf.bessel_j(-rho, s, acc)
        f2 = sr * sf.bessel_j(rho, s, acc)
        d1 = -sr * sf.bessel_j(1 - rho, s, acc)
        d2 = sr * sf.bessel_j(rho - 1, s, acc)
    return np.array([[f1, f2], [xi * d1, xi * d2]], dtype=complex)


def _sid_zero(mu: float, t: float) -> np.ndarray:
    # u'' + (2mu/t) u' = 0: solutions 1 and t^(1-2mu) (log t when mu = 1/2)
    if abs(mu - 0.5) < 1e-12:
        return np.array([[1.0, math.log(t)], [0.0, 1.0 / t]], dtype=complex)
    e = 1.0 - 2.0 * mu
    return np.array([[1.0, t ** e], [0.0, e * t ** (e - 1.0)]], dtype=complex)


def _mass_rho(kappa: float):
    disc = 1.0 - kappa * kappa
    if disc >= 0:
        return 0.5 * (1.0 + math.sqrt(disc))
    return 0.5 * (1.0 + 1j * math.sqrt(-disc))


def _mass_system(kappa: float, s: float, xi: float, acc):
    """Fundamental system of u'' + (xi^2 + kappa^2/(4t^2)) u = 0 at t = s/xi.

    Solutions exp(-i s) s^p F(2 i s) with F a Kummer or Tricomi function.
    """
    rho = _mass_rho(kappa)
    z = 2j * s
    e = cmath.exp(-1j * s)
    two_rho = complex(2 * rho)
    integer_b = two_rho.imag == 0 and abs(two_rho.real - round(two_rho.real)) < 1e-12

    def column(p, F, dF):
        sp = cmath.exp(p * math.log(s))
        val = e * sp * F
        der = e * sp * ((-1j + p / s) * F + 2j * dF)
        return val, xi * der

    F1, dF1 = sf.kummer_phi_pair(rho, 2 * rho, z, acc)
    c1 = column(rho, F1, dF1)
    if integer_b:
        F2, dF2 = sf.tricomi_psi_pair(rho, 2 * rho, z, acc)
        c2 = column(rho, F2, dF2)
    else:
        F2, dF2 = sf.kummer_phi_pair(1 - rho, 2 - 2 * rho, z, acc)
        c2 = column(1 - rho, F2, dF2)
    return np.array([[c1[0], c2[0]], [c1[1], c2[1]]], dtype=complex)


def _mass_zero(kappa: float, t: float) -> np.ndarray:
    rho = _mass_rho(kappa)
    if abs(kappa - 1.0) < 1e-12:
        r = math.sqrt(t)
        return np.array([[r, r * math.log(t)], [0.5 / r, (0.5 * math.log(t) + 1.0) / r]], dtype=complex)
    p, q = rho, 1 - rho
    tp, tq = t ** p, t ** q
    return np.array([[tp, tq], [p * tp / t, q * tq / t]], dtype=complex)


def _matched(system, t: float, xi: float, acc) -> np.ndarray:
    start = system(xi, xi, acc)
    det = np.linalg.det(start)
    if abs(det) < 1e-12:
        raise SingularMatching(f"fundamental-system Wronskian {abs(det):.3e} at t=1, |xi|={xi}")
    return system(t * xi, xi, acc) @ np.linalg.inv(start)


def _numeric_multiplier(model: ModelSpec, t: float, xi: float) -> np.ndarray:
    from .propagate import integrate_fundamental

    if model.kind == "VariableSpeed":
        a = model.a

        def gen(tt, _x):
            # d/dt (u, u_t) = [[0,1],[-xi^2 a^2,0]] (u, u_t); D_t = -i d/dt
            return np.array([[0.0, -1j], [1j * xi * xi * a(tt) ** 2, 0.0]])
    else:
        b = model.b

        def gen(tt, _x):
            # d/dt (u, u_t) = [[0,1],[-xi^2,-b]] (u, u_t); D_t = -i d/dt
            return np.array([[0.0, -1j], [1j * xi * xi, 1j * b(tt)]])
    return integrate_fundamental(gen, t, model.initial_time, xi, tol=1e-11).value


def exact_multiplier(model: ModelSpec, t: float, xi: float,
                     acc: sf.SpecFunAccuracy = sf.DEFAULT_ACCURACY) -> np.ndarray:
    """2x2 multiplier mapping (u_hat, ut_hat) at the initial time to time t."""
    t = float(t)
    xi = abs(float(xi))
    if t < model.initial_time and model.kind in ("DampedWave", "Heat", "WeakDissipation"):
        raise ConfigError("dissipative models are only evolved forward")
    k = model.kind
    if k == "FreeWave":
        return _const_propagator(0.0, xi * xi, t)
    if k == "KleinGordon":
        return _const_propagator(0.0, xi * xi + 1.0, t)
    if k == "DampedWave":
        return _const_propagator(1.0, xi * xi, t)
    if k == "Heat":
        h = math.exp(-t * xi * xi)
        return np.array([[h, 0.0], [-xi * xi * h, 0.0]], dtype=complex)
    if k == "ScaleInvariantDissipation":
        if xi == 0.0:
            return _sid_zero(model.mu, t) @ np.linalg.inv(_sid_zero(model.mu, 1.0))
        mu = model.mu
        return _matched(lambda s, x, a: _sid_system(mu, s, x, a), t, xi, acc)
    if k == "ScaleInvariantMass":
        if xi == 0.0:
            return _mass_zero(model.kappa, t) @ np.linalg.inv(_mass_zero(model.kappa, 1.0))
        kap = model.kappa
        return _matched(lambda s, x, a: _mass_system(kap, s, x, a), t, xi, acc)
    return _numeric_multiplier(model, t, xi)


def multiplier_grid(model: ModelSpec, t: float, grid) -> np.ndarray:
    """Stack of multipliers, shape (len(grid), 2, 2)."""
    return np.array([exact_multiplier(model, t, x) for x in np.asarray(grid, dtype=float)])


def evolve(model: ModelSpec, state: FourierState, t_target: float) -> FourierState:
    """Propagate a state from ``state.time`` to ``t_target``."""
    dissipative = model.kind in ("DampedWave", "Heat", "WeakDissipation")
    if dissipative and t_target < state.time:
        raise ConfigError("dissipative models are only evolved forward")
    u = np.empty_like(state.u_hat)
    ut = np.empty_like(state.ut_hat)
    t0 = model.initial_time
    for i, x in enumerate(state.grid):
        m_to = exact_multiplier(model, t_target, x)
        if state.time != t0:
            m_from = exact_multiplier(model, state.time, x)
            if model.kind == "Heat":
                step = np.array([[math.exp(-(t_target - state.time) * x * x), 0.0],
                                 [-x * x * math.exp(-(t_target - state.time) * x * x), 0.0]])
                m = step
            else:
                m = m_to @ np.linalg.inv(m_from)
        else:
            m = m_to
        u[i], ut[i] = m @ np.array([state.u_hat[i], state.ut_hat[i]])
    return replace(state, u_hat=u, ut_hat=ut, time=float(t_target))


def energy(state: FourierState, weights=None, mass: bool = False) -> float:
    """Half the weighted sum of |xi|^2 |u|^2 + |u_t|^2 (+ |u|^2 with ``mass``)."""
    w = radial_weights(state.grid, state.n) if weights is None else np.asarray(weights)
    dens = state.grid ** 2 * np.abs(state.u_hat) ** 2 + np.abs(state.ut_hat) ** 2
    if mass:
        dens = dens + np.abs(state.u_hat) ** 2
    return 0.5 * float(np.sum(w * dens))


def l2_norm(values, grid, n: int = 1) -> float:
    w = radial_weights(grid, n)
    return math.sqrt(float(np.sum(w * np.abs(values) ** 2)))


# ---------------------------------------------------------------------------
# scattering to a free wave

def _hankel_system(rho: float, s: float, xi: float, acc):
    sr = s ** rho
    cols = []
    for sign in (1, -1):
        cols.append((sr * sf.hankel(rho, s, sign, acc), xi * sr * sf.hankel(rho - 1, s, sign, acc)))
    return np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]], dtype=complex)


def hf_scattering_profile(mu: float, data: FourierState, xi_min: float = 0.5,
                          acc: sf.SpecFunAccuracy = sf.DEFAULT_ACCURACY):
    """Free-wave data (w0, w1) at t = 1 with t^mu u(t) - w(t) -> 0.

    u solves u_tt - Lap u + (2mu/t) u_t = 0 with the given data at t = 1.
    """
    grid = data.grid
    if np.any(grid < xi_min):
        raise SupportError(f"data has frequencies below xi_min = {xi_min}")
    rho = 0.5 - mu
    shift = 0.5 * rho * math.pi + 0.25 * math.pi
    w0 = np.empty(grid.shape, dtype=complex)
    w1 = np.empty(grid.shape, dtype=complex)
    for i, x in enumerate(grid):
        basis = _hankel_system(rho, x, x, acc)
        cp, cm = np.linalg.solve(basis, [data.u_hat[i], data.ut_hat[i]])
        amp = x ** (-mu) * math.sqrt(2.0 / math.pi)
        kp = amp * cp * cmath.exp(-1j * shift)
        km = amp * cm * cmath.exp(1j * shift)
        ep, em = cmath.exp(1j * x), cmath.exp(-1j * x)
        w0[i] = ep * kp + em * km
        w1[i] = 1j * x * (ep * kp - em * km)
    return w0, w1


def free_wave_evolve(w0, w1, grid, t: float, t0: float = 1.0):
    """Free-wave solution at time t from data at t0."""
    grid = np.asarray(grid, dtype=float)
    dt = t - t0
    c = np.cos(dt * grid)
    s = np.where(grid > 0, np.sin(dt * grid) / np.where(grid > 0, grid, 1.0), dt)
    return c * w0 + s * w1, -grid * np.sin(dt * grid) * w0 + c * w1


def scattering_defect(mu: float, data: FourierState, t: float, profile_data=None) -> float:
    """L2 norm of t^mu u(t) - w(t) over the radial grid."""
    model = ModelSpec("ScaleInvariantDissipation", n=data.n, mu=mu)
    w0, w1 = profile_data if profile_data is not None else hf_scattering_profile(mu, data)
    u = evolve(model, replace(data, time=1.0), t)
    w, _ = free_wave_evolve(w0, w1, data.grid, t)
    return l2_norm(t ** mu * u.u_hat - w, data.grid, data.n)
