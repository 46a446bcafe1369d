"""Zones of the (t, xi) half-space and empirical symbol-class estimation.

Class membership is estimated, never proved: a fit reports the largest ratio
of a finite-difference derivative to its weight over a sampled box.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, UnboundedFit

__all__ = [
    "ZoneConfig",
    "ZoneLabel",
    "SymbolSample",
    "FitRow",
    "FitTable",
    "t_xi",
    "classify",
    "smooth_step",
    "chi_hyp",
    "mixed_derivative",
    "symbol_class_fit",
    "t_class_fit",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ZoneConfig:
    """Zone constant ``c`` of Z_hyp(c) and the elliptic-zone frequency bound."""

    c: float = 1.0
    ell_cutoff: float = 0.1

    def __post_init__(self):
        if not (self.c > 0 and self.ell_cutoff > 0):
            raise ConfigError("zone constants must be positive")


class ZoneLabel(enum.Flag):
    HYP = enum.auto()
    PD = enum.auto()
    ELL = enum.auto()


def t_xi(xi: float, cfg: ZoneConfig = ZoneConfig()) -> float:
    """Time where (1 + t)|xi| = c, clipped at zero."""
    if xi <= 0:
        raise ConfigError("t_xi needs |xi| > 0")
    return max(0.0, cfg.c / xi - 1.0)


def classify(t: float, xi: float, cfg: ZoneConfig = ZoneConfig()) -> ZoneLabel:
    """HYP or PD, with ELL added for small frequencies at large times."""
    if t < 0:
        raise ConfigError("t must be nonnegative")
    label = ZoneLabel.HYP if (1.0 + t) * xi >= cfg.c else ZoneLabel.PD
    if xi <= cfg.ell_cutoff and t >= 1.0 / cfg.ell_cutoff:
        label |= ZoneLabel.ELL
    return label


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, slope at most 2."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        f1 = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    out = f0 / (f0 + f1)
    return out if out.ndim else float(out)


def chi_hyp(t, xi, cfg: ZoneConfig = ZoneConfig()):
    """Excision function: 0 where (1+t)|xi| <= c, 1 where it is >= 2c."""
    r = (1.0 + np.asarray(t, dtype=float)) * np.abs(np.asarray(xi, dtype=float)) / cfg.c
    return smooth_step(r - 1.0)


# ---------------------------------------------------------------------------
# finite differences

def _central_weights(order: int):
    """Offsets (in units of h) and weights of the order-th central difference."""
    offs = np.array([order / 2.0 - j for j in range(order + 1)])
    wts = np.array([(-1) ** j * math.comb(order, j) for j in range(order + 1)], dtype=float)
    return offs, wts


def _stencil(f, t, x, k, a, ht, hx):
    ot, wt = _central_weights(k)
    ox, wx = _central_weights(a)
    total = 0.0
    for i in range(k + 1):
        for j in range(a + 1):
            total = total + wt[i] * wx[j] * np.asarray(f(t + ot[i] * ht, x + ox[j] * hx))
    return total / (ht ** k * hx ** a)


def mixed_derivative(f: Callable, t: float, x: float, k: int, a: int,
                     ht: float, hx: float):
    """d_t^k d_xi^a f at (t, x), central differences with one Richardson level."""
    if k == 0 and a == 0:
        return np.asarray(f(t, x))
    coarse = _stencil(f, t, x, k, a, ht, hx)
    fine = _stencil(f, t, x, k, a, ht / 2, hx / 2)
    return (4.0 * fine - coarse) / 3.0


def _step(order: int, base: float) -> float:
    # balance truncation h^4 against rounding eps/h^order, never below the base
    return max(base, _EPS ** (1.0 / (order + 4)))


def _norm(v) -> float:
    v = np.asarray(v)
    if v.ndim == 2:
        return float(np.linalg.norm(v, 2))
    return float(np.max(np.abs(v)))


# ---------------------------------------------------------------------------
# class fits

@dataclass
class SymbolSample:
    """Evaluator (t, xi) -> scalar or matrix with the box it is sampled on."""

    evaluator: Callable
    t_range: Tuple[float, float] = (0.0, 100.0)
    xi_range: Tuple[float, float] = (1e-2, 100.0)
    fd_step: float = 1e-4
    points: int = 32

    def __post_init__(self):
        if self.t_range[0] < 0 or self.t_range[1] <= self.t_range[0]:
            raise ConfigError("bad t_range")
        if self.xi_range[0] <= 0 or self.xi_range[1] <= self.xi_range[0]:
            raise ConfigError("bad xi_range")


@dataclass
class FitRow:
    k: int
    alpha: int
    constant: float
    argmax_t: float
    argmax_xi: float
    unbounded: bool = False


@dataclass
class FitTable:
    m1: float
    m2: float
    rows: List[FitRow] = field(default_factory=list)

    def constant(self, k: int, alpha: int = 0) -> float:
        for r in self.rows:
            if r.k == k and r.alpha == alpha:
                return r.constant
        raise KeyError((k, alpha))

    @property
    def finite(self) -> bool:
        return all(np.isfinite(r.constant) and not r.unbounded for r in self.rows)

    def as_rows(self):
        return [(r.k, r.alpha, r.constant, r.argmax_t, r.argmax_xi) for r in self.rows]


def _log_points(lo, hi, n):
    return np.expm1(np.linspace(math.log1p(lo), math.log1p(hi), n))


def symbol_class_fit(sample: SymbolSample, m1: float, m2: float, max_k: int = 2,
                     max_alpha: int = 2, cfg: ZoneConfig = ZoneConfig()) -> FitTable:
    """Smallest C_{k,a} with |D_t^k D_xi^a f| <= C w_{k,a} on the sampled hyperbolic zone.

    The weight is max(|xi|, 1/(1+t))^(m1-a) (1/(1+t))^(m2+k). Steps scale with
    1+t and with |xi| so every stencil stays inside the sampled region.
    """
    if max_k > 3 or max_alpha > 3:
        raise ConfigError("derivative orders are capped at 3")
    ts = _log_points(*sample.t_range, sample.points)
    xs = np.geomspace(*sample.xi_range, sample.points)
    table = FitTable(m1, m2)
    for k in range(max_k + 1):
        for a in range(max_alpha + 1):
            best, arg = 0.0, (math.nan, math.nan)
            ratios = np.full((len(ts), len(xs)), np.nan)
            for i, t in enumerate(ts):
                for j, x in enumerate(xs):
                    if (1.0 + t) * x < cfg.c:
                        continue
                    order = k + a
                    ht = _step(order, sample.fd_step) * (1.0 + t) * 0.25
                    hx = _step(order, sample.fd_step) * x * 0.25
                    d = mixed_derivative(sample.evaluator, t, x, k, a, ht, hx)
                    w = max(x, 1.0 / (1.0 + t)) ** (m1 - a) * (1.0 + t) ** (-(m2 + k))
                    r = _norm(d) / w
                    ratios[i, j] = r
                    if r > best:
                        best, arg = r, (t, x)
            unbounded = _edge_growth(ratios, best)
            if unbounded:
                warnings.warn(UnboundedFit(f"C_{{{k},{a}}} = {best:.3e} grows toward the box edge"))
            table.rows.append(FitRow(k, a, best, arg[0], arg[1], unbounded))
    return table


def _edge_growth(ratios: np.ndarray, best: float) -> bool:
    """Large constant attained on the box boundary after monotone growth."""
    if not best > 1e6:
        return False
    i, j = np.unravel_index(np.nanargmax(ratios), ratios.shape)
    return i in (0, ratios.shape[0] - 1) or j in (0, ratios.shape[1] - 1)


def t_class_fit(f: Callable[[float], object], ell: float, t_range=(0.0, 1000.0),
                max_k: int = 3, points: int = 200, fd_step: float = 1e-4) -> FitTable:
    """Constants C_k with |D_t^k f(t)| <= C_k (1+t)^(-ell-k)."""
    ts = _log_points(*t_range, points)
    g = lambda t, _x: f(t)
    table = FitTable(0.0, ell)
    for k in range(max_k + 1):
        best, arg = 0.0, math.nan
        for t in ts:
            ht = _step(k, fd_step) * (1.0 + t) * 0.25
            d = mixed_derivative(g, t, 0.0, k, 0, ht, 1.0)
            r = _norm(d) * (1.0 + t) ** (ell + k)
            if r > best:
                best, arg = r, t
        table.rows.append(FitRow(k, 0, best, arg, math.nan))
    return table
