"""Level surfaces of homogeneous phases, contact indices and dispersive integrals.

A phase is positively homogeneous of degree one, so in polar coordinates
xi = rho * omega the phase is linear in rho. Oscillatory integrals use this:
the radial integral is done by Filon quadrature (exact against e^{i k rho}),
the angular one by the trapezoid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import minimize_scalar

from .errors import (ConfigError, FoldDetected, InsufficientRange, NewtonFailure,
                     NoFiniteIndex, OrderCapExceeded, QuadratureFailure)

__all__ = [
    "LevelSurface",
    "ContactIndexReport",
    "GraphData",
    "DecayFit",
    "sphere",
    "ellipse",
    "quartic",
    "blend",
    "wavefront_curve",
    "scaled",
    "local_graph",
    "ray_derivatives",
    "contact_indices",
    "family_index",
    "filon_linear",
    "oscillatory_integral",
    "radial_integral_3d",
    "sup_on_rays",
    "decay_fit",
    "power_slope",
]

ORDER_CAP = 6


# ---------------------------------------------------------------------------
# surfaces

@dataclass
class LevelSurface:
    """{xi : phase(xi) = level} for a phase homogeneous of degree one.

    ``phase`` maps an array of shape (..., n) to shape (...).
    """

    phase: Callable[[np.ndarray], np.ndarray]
    level: float = 1.0
    n: int = 2
    name: str = "custom"

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ConfigError("level surfaces are supported in n = 2 and n = 3")
        if not self.level > 0:
            raise ConfigError("level must be positive")

    def __call__(self, xi) -> np.ndarray:
        return self.phase(np.asarray(xi, dtype=float))

    def check_homogeneity(self, samples: int = 64, tol: float = 1e-8, seed: int = 0) -> dict:
        rng = np.random.default_rng(seed)
        w = _unit(rng.normal(size=(samples, self.n)))
        v = self(w)
        hom = float(np.max(np.abs(self(2.0 * w) - 2.0 * v)))
        return {"homogeneous": hom <= tol * max(1.0, float(np.max(np.abs(v)))),
                "defect": hom, "lower": float(np.min(v)), "upper": float(np.max(v))}

    def gradient(self, xi, h: float = 1e-6) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        g = np.empty(xi.shape)
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = h * max(1.0, float(np.max(np.abs(xi))))
            g[..., k] = (self(xi + e) - self(xi - e)) / (2 * e[k])
        return g

    def point(self, direction) -> np.ndarray:
        """The surface point on the ray through ``direction``."""
        w = _unit(np.asarray(direction, dtype=float))
        return self.level * w / self(w)[..., None] if w.ndim > 1 else self.level * w / self(w)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _norm(xi):
    return np.sqrt(np.sum(xi * xi, axis=-1))


def sphere(n: int = 2, radius: float = 1.0) -> LevelSurface:
    return LevelSurface(lambda xi: _norm(xi) / radius, 1.0, n, f"sphere(r={radius:g})")


def ellipse(a: float = 1.0, b: float = 0.5) -> LevelSurface:
    """xi_1^2/a^2 + xi_2^2/b^2 = 1."""
    return LevelSurface(lambda xi: np.sqrt((xi[..., 0] / a) ** 2 + (xi[..., 1] / b) ** 2),
                        1.0, 2, f"ellipse({a:g},{b:g})")


def quartic() -> LevelSurface:
    return LevelSurface(lambda xi: (xi[..., 0] ** 4 + xi[..., 1] ** 4) ** 0.25, 1.0, 2, "quartic")


def blend(s: float) -> LevelSurface:
    """(1 - s) |xi| + s (xi_1^4 + xi_2^4)^(1/4)."""
    return LevelSurface(lambda xi: (1 - s) * _norm(xi) + s * (xi[..., 0] ** 4 + xi[..., 1] ** 4) ** 0.25,
                        1.0, 2, f"blend({s:.3g})")


def wavefront_curve(eps: float = 0.1) -> LevelSurface:
    """|xi| (1 + eps cos 4 phi): the level curve r = 1/(1 + eps cos 4 phi).

    Non-convex for eps > 1/15, with inflection points of contact order 3.
    """
    def f(xi):
        r = _norm(xi)
        c4 = np.cos(4 * np.arctan2(xi[..., 1], xi[..., 0]))
        return r * (1 + eps * c4)
    return LevelSurface(f, 1.0, 2, f"wavefront({eps:g})")


def scaled(surface: LevelSurface, radius: float) -> LevelSurface:
    """The surface dilated by ``radius``."""
    ph = surface.phase
    return LevelSurface(lambda xi: ph(np.asarray(xi) / radius), surface.level, surface.n,
                        f"{surface.name}*{radius:g}")


# ---------------------------------------------------------------------------
# local graphs

def _frame(surface: LevelSurface, p: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose last column is the outward unit normal at p."""
    g = surface.gradient(p)
    if np.linalg.norm(g) == 0:
        raise ConfigError("gradient vanishes at p")
    nu = g / np.linalg.norm(g)
    Q, _ = np.linalg.qr(np.column_stack([nu, np.eye(surface.n)]))
    Q = Q[:, :surface.n]
    Q[:, 0] *= np.sign(Q[:, 0] @ nu)
    return np.column_stack([Q[:, 1:], Q[:, 0]])


def _solve_heights(surface, p, Q, Y, tol=1e-13, max_iter=60):
    """h(y) with phase(p + Q[:, :-1] y + h nu) = level, Newton along the normal."""
    base = p + Y @ Q[:, :-1].T
    nu = Q[:, -1]
    h = np.zeros(len(Y))
    scale = max(1.0, float(np.linalg.norm(p)))
    dh = 1e-7 * scale
    for _ in range(max_iter):
        x = base + h[:, None] * nu
        g = surface(x) - surface.level
        dg = (surface(x + dh * nu) - surface(x - dh * nu)) / (2 * dh)
        if np.any(dg <= 0):
            raise FoldDetected("normal derivative of the phase is not positive on the disc")
        step = g / dg
        h = h - step
        if np.max(np.abs(step)) <= tol * scale:
            return h
    raise NewtonFailure("local graph Newton iteration did not converge")


@dataclass
class GraphData:
    p: np.ndarray
    frame: np.ndarray
    y: np.ndarray
    h: np.ndarray
    coefficients: Dict[Tuple[int, ...], float]


def ray_derivatives(surface: LevelSurface, p, omega, radius: float = 0.2,
                    order: int = ORDER_CAP, nodes: int = 41, frame=None) -> np.ndarray:
    """d^j/drho^j h(rho omega) at rho = 0 for j = 0..order.

    omega is a unit tangent direction given in the tangent coordinates of the
    graph frame. Chebyshev fit of h on [-radius, radius].
    """
    p = np.asarray(p, dtype=float)
    Q = _frame(surface, p) if frame is None else frame
    omega = np.asarray(omega, dtype=float)
    rho = radius * np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    h = _solve_heights(surface, p, Q, rho[:, None] * omega[None, :])
    c = C.chebfit(rho / radius, h, nodes - 1)
    out = np.empty(order + 1)
    for j in range(order + 1):
        out[j] = C.chebval(0.0, C.chebder(c, j)) / radius ** j
    return out


def local_graph(surface: LevelSurface, p, radius: float = 0.2, samples: int = 9,
                order: int = ORDER_CAP) -> GraphData:
    """Graph {(y, h(y))} of the surface near p over the tangent plane.

    Returns height samples on a disc and Taylor coefficients up to ``order``
    (h(0) = grad h(0) = 0 by construction). Coefficients are keyed by
    multi-index; in n = 2 the single key (j,) is h^(j)(0)/j!.
    """
    p = np.asarray(p, dtype=float)
    if abs(float(surface(p)) - surface.level) > 1e-10 * max(1.0, surface.level):
        raise ConfigError("p is not on the level surface")
    Q = _frame(surface, p)
    m = surface.n - 1
    if m == 1:
        y = np.linspace(-radius, radius, 2 * samples + 1)[:, None]
        d = ray_derivatives(surface, p, np.array([1.0]), radius, order, frame=Q)
        coeffs = {(j,): d[j] / math.factorial(j) for j in range(2, order + 1)}
    else:
        g = np.linspace(-radius, radius, 2 * samples + 1)
        Y = np.array([(a, b) for a in g for b in g if a * a + b * b <= radius * radius])
        y = Y
        coeffs = {}
        # least squares in monomials y1^a y2^b, 2 <= a + b <= order
        hs = _solve_heights(surface, p, Q, Y)
        keys = [(a, b) for s in range(2, order + 1) for a in range(s + 1) for b in [s - a]]
        V = np.column_stack([(Y[:, 0] / radius) ** a * (Y[:, 1] / radius) ** b for a, b in keys])
        sol, *_ = np.linalg.lstsq(V, hs, rcond=None)
        coeffs = {k: sol[i] / radius ** sum(k) for i, k in enumerate(keys)}
    h = _solve_heights(surface, p, Q, y)
    return GraphData(p, Q, y, h, coeffs)


# ---------------------------------------------------------------------------
# contact indices

@dataclass
class ContactIndexReport:
    gamma: int
    gamma0: int
    kappa_values: Dict[int, float]
    argmin: np.ndarray
    convex: bool
    orders: np.ndarray = field(repr=False, default=None)


def _tangent_dirs(n: int, count: int) -> np.ndarray:
    if n == 2:
        return np.array([[1.0]])
    a = np.pi * np.arange(count) / count
    return np.column_stack([np.cos(a), np.sin(a)])


def _surface_points(surface: LevelSurface, count: int) -> np.ndarray:
    if surface.n == 2:
        a = 2 * np.pi * np.arange(count) / count
        dirs = np.column_stack([np.cos(a), np.sin(a)])
    else:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5 ** 0.5) * k
        r = np.sqrt(1 - z * z)
        dirs = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        dirs = np.vstack([dirs, np.eye(3), -np.eye(3)])
    return surface.point(dirs)


def _refine_flat_points(surface: LevelSurface, count: int, radius: float) -> np.ndarray:
    """Curve points where |h''| has a local minimum, located by Brent's method."""
    a = 2 * np.pi * np.arange(count) / count
    pts = surface.point(np.column_stack([np.cos(a), np.sin(a)]))
    curv = lambda ang: abs(ray_derivatives(surface, surface.point(np.array([math.cos(ang), math.sin(ang)])),
                                           np.array([1.0]), radius, order=2)[2])
    c = np.array([curv(x) for x in a])
    out = []
    for i in range(count):
        if c[i] <= c[i - 1] and c[i] <= c[(i + 1) % count]:
            da = 2 * np.pi / count
            res = minimize_scalar(curv, bounds=(a[i] - da, a[i] + da), method="bounded",
                                  options={"xatol": 1e-10})
            out.append(surface.point(np.array([math.cos(res.x), math.sin(res.x)])))
    return np.vstack([pts] + ([np.array(out)] if out else []))


def contact_indices(surface: LevelSurface, points: Optional[np.ndarray] = None,
                    directions: int = 8, tol: float = 1e-6, radius: Optional[float] = None,
                    grid: int = 64, cap_error: bool = True,
                    refine: bool = True) -> ContactIndexReport:
    """Contact orders of the surface with its tangent lines.

    At each (p, omega) the order is the smallest j in [2, 6] with
    |d^j h(rho omega)| > tol. gamma = max over p and omega, gamma0 = max over
    p of the min over omega. kappa_values[g] = min over p of min over omega
    of sum_{j=2}^g |d^j h|. The graph probe radius defaults to 0.2 times the
    smallest |p| on the surface, so dilated surfaces are probed alike.
    """
    if radius is None:
        radius = 0.2 * float(np.min(_norm(_surface_points(surface, grid))))
    if points is not None:
        P = np.asarray(points, dtype=float)
    elif surface.n == 2 and refine:
        P = _refine_flat_points(surface, grid, radius)
    else:
        P = _surface_points(surface, grid)
    dirs = _tangent_dirs(surface.n, directions)
    orders = np.zeros((len(P), len(dirs)), dtype=int)
    ksum = np.zeros((len(P), len(dirs), ORDER_CAP + 1))
    convex = True
    for i, p in enumerate(P):
        Q = _frame(surface, p)
        second = []
        for j, w in enumerate(dirs):
            d = ray_derivatives(surface, p, w, radius, frame=Q)
            ad = np.abs(d)
            big = np.flatnonzero(ad[2:] > tol)
            if len(big) == 0:
                if cap_error:
                    raise OrderCapExceeded(f"flat direction at p={p}: no derivative above {tol:g} up to order 6")
                orders[i, j] = ORDER_CAP + 1
            else:
                orders[i, j] = 2 + int(big[0])
            ksum[i, j, 2:] = np.cumsum(ad[2:])
            second.append(d[2])
        if surface.n == 2:
            convex &= second[0] <= tol
        else:
            e1 = ray_derivatives(surface, p, np.array([1.0, 0.0]), radius, frame=Q)[2]
            e2 = ray_derivatives(surface, p, np.array([0.0, 1.0]), radius, frame=Q)[2]
            dd = ray_derivatives(surface, p, np.array([1.0, 1.0]) / 2 ** 0.5, radius, frame=Q)[2]
            h12 = dd - 0.5 * (e1 + e2)
            convex &= bool(np.max(np.linalg.eigvalsh(np.array([[e1, h12], [h12, e2]]))) <= tol)
    gamma = int(orders.max())
    gamma0 = int(orders.min(axis=1).max())
    kap = {}
    for g in range(2, ORDER_CAP + 1):
        per_p = ksum[:, :, g].min(axis=1)
        kap[g] = float(per_p.min())
    arg = P[int(np.argmin(ksum[:, :, min(gamma, ORDER_CAP)].min(axis=1)))]
    return ContactIndexReport(gamma, gamma0, kap, arg, bool(convex), orders)


def family_index(family: Callable, t_grid: Sequence[float], mode: str = "uniform",
                 x_grid: Optional[Sequence] = None, tol: float = 1e-6, grid: int = 32) -> int:
    """Smallest gamma with inf over the family of kappa(Sigma_t, gamma) > tol.

    ``family(t)`` (or ``family(t, x)`` with ``x_grid``) returns a LevelSurface.
    ``uniform`` takes the min over the whole t-grid, ``asymptotic`` over its
    largest half as a proxy for the liminf.
    """
    if mode not in ("uniform", "asymptotic"):
        raise ConfigError("mode must be 'uniform' or 'asymptotic'")
    ts = np.sort(np.asarray(t_grid, dtype=float))
    if mode == "asymptotic":
        ts = ts[len(ts) // 2:]
    xs = [None] if x_grid is None else list(x_grid)
    worst = {g: math.inf for g in range(2, ORDER_CAP + 1)}
    for t in ts:
        for x in xs:
            surf = family(t) if x is None else family(t, x)
            rep = contact_indices(surf, grid=grid, tol=tol, cap_error=False)
            for g in worst:
                worst[g] = min(worst[g], rep.kappa_values[g])
    for g in range(2, ORDER_CAP + 1):
        if worst[g] > tol:
            return g
    raise NoFiniteIndex(f"kappa stays below {tol:g} up to order {ORDER_CAP}")


# ---------------------------------------------------------------------------
# oscillatory integrals

def _moments(theta: np.ndarray):
    """int_{-1}^{1} e^{i theta u} u^m du for m = 0, 1, 2."""
    th = np.asarray(theta, dtype=float)
    small = np.abs(th) < 1.0
    ts = np.where(small, 1.0, th)
    s, c = np.sin(ts), np.cos(ts)
    m0 = 2 * s / ts
    m1 = 2j * (s - ts * c) / ts ** 2
    m2 = 2 * ((ts * ts - 2) * s + 2 * ts * c) / ts ** 3
    if np.any(small):
        x = np.where(small, th, 0.0)
        z = np.ones_like(x, dtype=complex)
        s0 = np.zeros_like(z)
        s1 = np.zeros_like(z)
        s2 = np.zeros_like(z)
        for p in range(22):
            if p % 2 == 0:
                s0 += 2 * z / (p + 1)
                s2 += 2 * z / (p + 3)
            else:
                s1 += 2 * z / (p + 2)
            z = z * 1j * x / (p + 1)
        m0 = np.where(small, s0, m0)
        m1 = np.where(small, s1, m1)
        m2 = np.where(small, s2, m2)
    return m0, m1, m2


def filon_linear(k, f_vals: np.ndarray, a: float, b: float) -> np.ndarray:
    """int_a^b e^{i k r} f(r) dr with f given at 2P+1 equispaced nodes.

    Piecewise-quadratic Filon rule; ``k`` may be an array (one per row of
    ``f_vals``), which then has shape (len(k), 2P+1).
    """
    f = np.atleast_2d(f_vals)
    k = np.atleast_1d(np.asarray(k, dtype=float))[:, None]
    npts = f.shape[1]
    if npts < 3 or npts % 2 == 0:
        raise ConfigError("Filon rule needs an odd number of at least 3 nodes")
    P = (npts - 1) // 2
    h = (b - a) / (2 * P)
    centers = a + h * (2 * np.arange(P) + 1)
    f0, f1, f2 = f[:, 0:-2:2], f[:, 1::2], f[:, 2::2]
    m0, m1, m2 = _moments(k * h)
    e = np.exp(1j * k * centers[None, :])
    val = f1 * h * m0 + (f2 - f0) * 0.5 * h * m1 + (f0 - 2 * f1 + f2) * 0.5 * h * m2
    return np.sum(e * val, axis=1)


def _radial_panels(t: float, rmax: float, base: int) -> int:
    return base + int(2 * t * rmax)


def oscillatory_integral(phase: Callable[[np.ndarray], np.ndarray],
                         amplitude: Callable[[np.ndarray, np.ndarray], np.ndarray],
                         t: float, x, r_range: Tuple[float, float] = (1.0, 2.0),
                         level: Optional[int] = None, rel_tol: float = 1e-6,
                         angles: Optional[int] = None, panels: int = 64,
                         max_doublings: int = 6) -> complex:
    """I(t, x) = int_{R^2} e^{i(x.xi + t phase(xi))} a(xi) dxi.

    ``phase`` is homogeneous of degree one and takes unit directions of shape
    (m, 2); ``amplitude(rho, omega)`` is supported in r_range in rho. With
    ``level`` j the amplitude is multiplied by psi(2^-j phase(xi)), psi a
    smooth bump on [1/2, 2]. Angle and panel counts are doubled until two
    successive values agree to rel_tol.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = r_range
    if not 0 <= lo < hi:
        raise ConfigError("bad radial range")
    na = angles or (128 + 4 * int(t * hi))
    npan = _radial_panels(t, hi, panels)
    prev = None
    for _ in range(max_doublings):
        val = _osc_once(phase, amplitude, t, x, lo, hi, level, na, npan)
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        prev = val
        na *= 2
        npan *= 2
    raise QuadratureFailure(f"oscillatory integral at t={t:g} did not reach rel_tol {rel_tol:g}")


def _dyadic(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0.5) & (u < 2.0)
    v = np.log2(u[inside])
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - v * v))
    return out


def _osc_once(phase, amplitude, t, x, lo, hi, level, na, npan):
    a = 2 * np.pi * np.arange(na) / na
    om = np.column_stack([np.cos(a), np.sin(a)])
    th = phase(om)
    k = om @ x + t * th
    r = np.linspace(lo, hi, 2 * npan + 1)
    f = amplitude(r[None, :], om) * r[None, :]
    if level is not None:
        f = f * _dyadic(2.0 ** (-level) * r[None, :] * th[:, None])
    radial = filon_linear(k, f, lo, hi)
    return complex(np.sum(radial) * 2 * np.pi / na)


def radial_integral_3d(amplitude: Callable[[np.ndarray], np.ndarray], t: float, r: float,
                       r_range: Tuple[float, float] = (1.0, 2.0), panels: int = 64,
                       rel_tol: float = 1e-8) -> complex:
    """int_{R^3} e^{i(x.xi + t|xi|)} a(|xi|) dxi at |x| = r, reduced to one dimension.

    = (4 pi / r) int e^{i t rho} a(rho) rho sin(r rho) drho.
    """
    lo, hi = r_range
    npan = _radial_panels(t + r, hi, panels)
    prev = None
    for _ in range(6):
        rho = np.linspace(lo, hi, 2 * npan + 1)
        g = amplitude(rho) * rho
        if r == 0:
            val = 4 * np.pi * filon_linear(t, g * rho, lo, hi)[0]
        else:
            plus = filon_linear(t + r, g, lo, hi)[0]
            minus = filon_linear(t - r, g, lo, hi)[0]
            val = 4 * np.pi / r * (plus - minus) / 2j
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return complex(val)
        prev = val
        npan *= 2
    raise QuadratureFailure("radial reduction did not converge")


@dataclass
class RaySup:
    t: float
    value: float
    direction: np.ndarray
    off_ray: np.ndarray


def sup_on_rays(phase: Callable, amplitude: Callable, t: float, directions,
                r_range=(1.0, 2.0), rel_tol: float = 1e-6, off_ray: int = 3,
                seed: int = 0, h: float = 1e-6) -> RaySup:
    """max |I(t, x)| over x = -t grad phase(omega*) for the given omega*.

    Also evaluates ``off_ray`` random points at distance ~t off the rays.
    """
    dirs = _unit(np.atleast_2d(np.asarray(directions, dtype=float)))
    best, arg = -1.0, None
    for w in dirs:
        g = np.array([(phase((w + h * e)[None])[0] - phase((w - h * e)[None])[0]) / (2 * h)
                      for e in np.eye(2)])
        v = abs(oscillatory_integral(phase, amplitude, t, -t * g, r_range, rel_tol=rel_tol))
        if v > best:
            best, arg = v, w
    rng = np.random.default_rng(seed)
    offs = []
    for _ in range(off_ray):
        x = rng.normal(size=2)
        x *= 3.0 * t / np.linalg.norm(x)
        offs.append(abs(oscillatory_integral(phase, amplitude, t, x, r_range, rel_tol=rel_tol)))
    return RaySup(t, best, arg, np.array(offs))


# ---------------------------------------------------------------------------
# fitting

@dataclass
class DecayFit:
    exponent: float
    lo: float
    hi: float
    intercept: float
    used: int


def power_slope(t, y) -> Tuple[float, float]:
    """Least-squares slope and intercept of log y against log t."""
    lt, ly = np.log(np.asarray(t, dtype=float)), np.log(np.asarray(y, dtype=float))
    A = np.column_stack([lt, np.ones_like(lt)])
    (s, c), *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(s), float(c)


def decay_fit(t, y, boot: int = 200, seed: int = 0, upper_half: bool = True) -> DecayFit:
    """Log-log slope over the upper half (in log t) with a bootstrap band."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 8 or t.max() < 10 * t.min():
        raise InsufficientRange("need at least 8 samples spanning a decade")
    if np.any(y <= 0):
        raise InsufficientRange("samples must be positive for a log-log fit")
    if upper_half:
        keep = t >= math.sqrt(t.min() * t.max())
        t, y = t[keep], y[keep]
    s, c = power_slope(t, y)
    rng = np.random.default_rng(seed)
    slopes = []
    for _ in range(boot):
        idx = rng.integers(0, len(t), len(t))
        if np.unique(t[idx]).size < 2:
            continue
        slopes.append(power_slope(t[idx], y[idx])[0])
    lo, hi = (np.percentile(slopes, [2.5, 97.5]) if slopes else (s, s))
    return DecayFit(s, float(min(lo, s)), float(max(hi, s)), c, len(t))
