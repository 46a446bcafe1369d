"""Command-line experiment harness.

``hypwave run config.json`` runs one experiment from the catalog and writes
one CSV per report plus a JSON metadata sidecar. ``hypwave list`` prints the
catalog. Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, HypwaveError, NumericalError

log = logging.getLogger("hypwave")

Table = Tuple[List[str], List[Sequence[float]]]


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: Dict[str, object] = field(default_factory=dict)
    grid: Dict[str, object] = field(default_factory=dict)
    output: str = "."
    seed: int = 0
    threads: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if "experiment" not in d:
            raise ConfigError("missing key 'experiment'")
        unknown = set(d) - {"experiment", "parameters", "grid", "output", "seed", "threads"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(str(d["experiment"]), dict(d.get("parameters", {})), dict(d.get("grid", {})),
                   str(d.get("output", ".")), int(d.get("seed", 0)), int(d.get("threads", 0)))


@dataclass(frozen=True)
class Experiment:
    name: str
    required: Tuple[str, ...]
    columns: str
    anchor: str
    runner: Callable


def _get(cfg: ExperimentConfig, key: str, default=None, cast=float):
    if key in cfg.parameters:
        v = cfg.parameters[key]
    elif key in cfg.grid:
        v = cfg.grid[key]
    elif default is not None:
        return default
    else:
        raise ConfigError(f"missing parameter {key!r} for experiment {cfg.experiment!r}")
    try:
        return cast(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r} has invalid value {v!r}") from exc


def _floats(v):
    return [float(x) for x in v]


def _geom(cfg, key, lo, hi, num):
    spec = _get(cfg, key, [lo, hi, num], cast=list)
    if len(spec) != 3:
        raise ConfigError(f"{key!r} must be [lo, hi, count]")
    a, b, c = float(spec[0]), float(spec[1]), int(spec[2])
    if not (0 < a < b and c >= 2):
        raise ConfigError(f"{key!r} must satisfy 0 < lo < hi and count >= 2")
    return np.geomspace(a, b, c)


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# experiments

def _models_decay(cfg, threads) -> Dict[str, Table]:
    from . import models as M
    kind = _get(cfg, "model", cast=str)
    n = _get(cfg, "n", 1, int)
    kw = {}
    if kind in ("ScaleInvariantDissipation",):
        kw["mu"] = _get(cfg, "mu")
    if kind == "ScaleInvariantMass":
        kw["kappa"] = _get(cfg, "kappa")
    spec = M.ModelSpec(kind, n, **kw)
    prof = _get(cfg, "profile", "gaussian", str)
    if prof == "annulus":
        grid = np.linspace(1.0, 4.0, _get(cfg, "points", 400, int))
    else:
        grid = M.radial_grid(_get(cfg, "points", 600, int), 1e-4, 30.0)
    u0 = M.profile(prof, grid)
    u1 = u0 if _get(cfg, "velocity", 1, int) else np.zeros_like(u0)
    st = M.FourierState(grid, u0, u1, spec.initial_time, n)
    ts = _geom(cfg, "t", 10.0, 1e3, 16)
    rows = _pmap(lambda t: (t, M.energy(M.evolve(spec, st, t)),
                            M.l2_norm(M.evolve(spec, st, t).u_hat, grid, n)), ts, threads)
    return {"decay": (["t", "energy", "l2"], rows)}


def _annulus_state(n=1):
    from . import models as M
    g = np.linspace(1.0, 4.0, 400)
    return M.FourierState(g, M.profile("annulus", g), np.zeros(400), 1.0, n)


def _scattering(cfg, threads):
    from . import models as M
    mu = _get(cfg, "mu")
    st = _annulus_state()
    prof = M.hf_scattering_profile(mu, st)
    ts = _geom(cfg, "t", 10.0, 1e3, 12)
    rows = _pmap(lambda t: (t, M.scattering_defect(mu, st, t, prof)), ts, threads)
    return {"scattering": (["t", "defect"], rows)}


def _gec(cfg, threads):
    from . import diag as D
    mode = _get(cfg, "b", cast=str)
    mu = _get(cfg, "mu", 0.5)
    if mode == "integrable":
        b = lambda t: 0.5 / (1.0 + t) ** 2
    elif mode == "scale":
        b = lambda t: mu / (1.0 + t)
    else:
        raise ConfigError("parameter 'b' must be 'integrable' or 'scale'")
    h = D.Hierarchy(D.damped_wave_system(b), 1)
    xis = _floats(_get(cfg, "xi", [0.5, 1.0, 4.0], list))
    r = D.gec_test(lambda t, x: h.F(0, t, x), 1.0, _get(cfg, "T_max", 1e3),
                   xis, t_points=_get(cfg, "t_points", 60, int))
    return {"gec": (["T", "running_sup"], list(zip(r.growth_T, r.growth_sup)))}


def _hierarchy(cfg, threads):
    from . import diag as D
    which = _get(cfg, "system", cast=str)
    if which == "damped":
        sysm = D.damped_wave_system(lambda t: 0.5 / (1.0 + t))
    elif which == "variable":
        sysm = D.variable_speed_system(lambda t: 2.0 + math.sin(math.log1p(t)),
                                       lambda t: math.cos(math.log1p(t)) / (1.0 + t))
    else:
        raise ConfigError("parameter 'system' must be 'damped' or 'variable'")
    h = D.Hierarchy(sysm, _get(cfg, "depth", 2, int))
    rng = np.random.default_rng(cfg.seed)
    pts = []
    for _ in range(_get(cfg, "points", 100, int)):
        xi = float(np.exp(rng.uniform(math.log(0.05), math.log(50.0))))
        s = D.zone_entry(h, xi)
        t = s + float(np.exp(rng.uniform(0.0, math.log(1e3))) - 1.0)
        pts.append((t, xi))
    rows = [(t, xi, h.conjugation_residual(t, xi)) for t, xi in pts]
    return {"residuals": (["t", "xi", "residual"], rows)}


def _floquet_scan(cfg, threads):
    from . import floquet as F
    coef = F.PeriodicCoefficient(eps=_get(cfg, "eps"))
    lo, hi = _floats(_get(cfg, "xi_range", [0.5, 6.0], list))
    xs = np.linspace(lo, hi, _get(cfg, "points", 89, int))
    rows = _pmap(lambda x: (x, F.monodromy(coef, x).kappa), xs, threads)
    return {"scan": (["xi", "kappa"], rows)}


def _resonance_growth(cfg, threads):
    from . import floquet as F
    tau, delta, eta, nn = F.geometric_sequences(_get(cfg, "sigma"), _get(cfg, "q"), _get(cfg, "K", cast=int))
    coef = F.build_coefficient(tau, delta, eta, nn)
    r = F.energy_growth_experiment(coef)
    rows = [(k + 1, r.n[k], r.log_gain_interval[k], r.log_energy_end[k], r.lower_bound[k])
            for k in range(len(r.n))]
    return {"growth": (["k", "n_k", "log_gain", "log_energy_end", "lower_bound"], rows)}


def _diffusion(cfg, threads):
    from . import dissipative as Dp
    g = np.linspace(1e-4, 20.0, 4000)
    u0 = np.exp(-g ** 2)
    u1 = u0 if _get(cfg, "velocity", 0, int) else np.zeros_like(u0)
    k = _get(cfg, "k", 0, int)
    a = _get(cfg, "alpha", 0, int)
    ts = _geom(cfg, "t", 10.0, 1e3, 12)
    rows = _pmap(lambda t: (t,) + Dp.diffusion_difference(u0, u1, g, t, 1, k, a), ts, threads)
    rows = [(t, d, r0, r1, d / (r0 + r1)) for t, d, r0, r1 in rows]
    return {"diffusion": (["t", "difference", "ref_u0", "ref_u1", "ratio"], rows)}


def _kalman_lyapunov(cfg, threads):
    from . import dissipative as Dp
    s = Dp.test_system()
    xis = _floats(_get(cfg, "xi", [0.05, 0.2, 1.0, 5.0], list))
    r = Dp.lyapunov_decay_verify(s, xis, np.linspace(0.0, _get(cfg, "T", 60.0), 13),
                                 samples=_get(cfg, "samples", 4, int), seed=cfg.seed)
    rows = [(x, r.gamma_per_xi[x], r.sandwich_lo, r.sandwich_hi, r.gamma) for x in r.gamma_per_xi]
    return {"lyapunov": (["xi", "gamma_xi", "sandwich_lo", "sandwich_hi", "gamma"], rows)}


def _profile_compare(cfg, threads):
    from . import dissipative as Dp
    s = Dp.test_system()
    ts = _geom(cfg, "t", 1e2, 1e4, 5)
    r = Dp.diffusion_profile_compare(s, lambda x: np.array([np.exp(-x * x)] * 2), ts,
                                     points=_get(cfg, "points", 201, int))
    return {"profile": (["t", "difference", "normalized", "solution_norm"],
                        list(zip(r.t, r.difference, r.normalized, r.solution_norm)))}


SURFACES = {
    "sphere": lambda: __import__("hypwave.geometry", fromlist=["x"]).sphere(2),
    "sphere3": lambda: __import__("hypwave.geometry", fromlist=["x"]).sphere(3),
    "ellipse": lambda: __import__("hypwave.geometry", fromlist=["x"]).ellipse(),
    "quartic": lambda: __import__("hypwave.geometry", fromlist=["x"]).quartic(),
    "wavefront": lambda: __import__("hypwave.geometry", fromlist=["x"]).wavefront_curve(0.1),
}


def _surface(cfg):
    name = _get(cfg, "surface", cast=str)
    if name not in SURFACES:
        raise ConfigError(f"unknown surface {name!r}; choose from {sorted(SURFACES)}")
    return SURFACES[name]()


def _contact_index(cfg, threads):
    from . import geometry as G
    rep = G.contact_indices(_surface(cfg), cap_error=False)
    rows = [(g, rep.kappa_values[g], rep.gamma, rep.gamma0, int(rep.convex)) for g in sorted(rep.kappa_values)]
    return {"contact": (["order", "kappa", "gamma", "gamma0", "convex"], rows)}


def _radial_bump(r):
    u = 2 * np.asarray(r, dtype=float) - 3.0
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(1 - 1 / (1 - u[m] ** 2))
    return out


def _dispersive_fit(cfg, threads):
    from . import geometry as G
    surf = _surface(cfg)
    ts = _geom(cfg, "t", 20.0, 500.0, 10)
    if surf.n == 3:
        rows = _pmap(lambda t: (t, abs(G.radial_integral_3d(_radial_bump, t, t))), ts, threads)
    else:
        rep = G.contact_indices(surf, cap_error=False)
        direction = rep.argmin / np.linalg.norm(rep.argmin)
        amp = lambda r, om: _radial_bump(r) * np.ones((om.shape[0], 1))
        rows = _pmap(lambda t: (t, G.sup_on_rays(surf.phase, amp, t, [direction], off_ray=0,
                                                 rel_tol=1e-5).value), ts, threads)
    fit = G.decay_fit([r[0] for r in rows], [r[1] for r in rows], seed=cfg.seed)
    return {"sup": (["t", "sup_abs_I"], rows),
            "fit": (["exponent", "band_lo", "band_hi", "used"], [(fit.exponent, fit.lo, fit.hi, fit.used)])}


def _constcoeff_amplitudes(cfg, threads):
    from . import constcoeff as CC
    speeds = _floats(_get(cfg, "speeds", [1.0, -1.0], list))
    op = CC.operator_from_speeds(speeds)
    xi = _get(cfg, "xi", 3.0)
    ts = np.linspace(0.0, _get(cfg, "T", 5.0), _get(cfg, "points", 11, int))
    roots = CC.char_roots(op, [xi], strict=True)
    m = len(speeds)
    rows = []
    for t in ts:
        vals = []
        for j in range(m):
            A = CC.amplitudes(roots, j)
            vals.append(complex(np.sum(A * np.exp(1j * np.asarray(roots.roots) * t))))
        rows.append([t] + [v.real for v in vals] + [v.imag for v in vals])
    cols = ["t"] + [f"re_K{j}" for j in range(m)] + [f"im_K{j}" for j in range(m)]
    return {"multipliers": (cols, rows)}


CATALOG: Dict[str, Experiment] = {e.name: e for e in [
    Experiment("models-decay", ("model",), "t,energy,l2",
               "energy decay of exact multiplier solutions (damped wave: Matsumura-type rate)", _models_decay),
    Experiment("scattering", ("mu",), "t,defect",
               "scattering of t^mu u to a free wave at high frequencies", _scattering),
    Experiment("gec", ("b",), "T,running_sup",
               "generalised energy conservation dichotomy via int Im F0", _gec),
    Experiment("hierarchy", ("system",), "t,xi,residual",
               "diagonalisation hierarchy conjugation identity", _hierarchy),
    Experiment("floquet-scan", ("eps",), "xi,kappa",
               "Borg instability for a nonconstant periodic coefficient", _floquet_scan),
    Experiment("resonance-growth", ("sigma", "q", "K"), "k,n_k,log_gain,log_energy_end,lower_bound",
               "sharpness of the T{0} assumption by resonant energy growth", _resonance_growth),
    Experiment("diffusion", ("k", "alpha"), "t,difference,ref_u0,ref_u1,ratio",
               "diffusion phenomenon damped wave versus heat", _diffusion),
    Experiment("kalman-lyapunov", (), "xi,gamma_xi,sandwich_lo,sandwich_hi,gamma",
               "Kalman rank condition and Lyapunov decay for dissipative systems", _kalman_lyapunov),
    Experiment("profile-compare", (), "t,difference,normalized,solution_norm",
               "diffusion profile of partially dissipative systems", _profile_compare),
    Experiment("contact-index", ("surface",), "order,kappa,gamma,gamma0,convex",
               "contact indices of level surfaces", _contact_index),
    Experiment("dispersive-fit", ("surface",), "t,sup_abs_I | exponent,band_lo,band_hi,used",
               "dispersive decay rate t^{-(n-1)/gamma}", _dispersive_fit),
    Experiment("constcoeff-amplitudes", (), "t,re_K*,im_K*",
               "amplitude representation of constant-coefficient solutions", _constcoeff_amplitudes),
]}


def list_experiments() -> str:
    lines = []
    for e in CATALOG.values():
        req = ", ".join(e.required) if e.required else "-"
        lines.append(f"{e.name}\n  required: {req}\n  columns: {e.columns}\n  anchor: {e.anchor}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(np.real(v))


def run(cfg: ExperimentConfig) -> List[str]:
    """Run one experiment and write its CSV files and metadata; returns written paths."""
    if cfg.experiment not in CATALOG:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    exp = CATALOG[cfg.experiment]
    for key in exp.required:
        if key not in cfg.parameters and key not in cfg.grid:
            raise ConfigError(f"missing parameter {key!r} for experiment {exp.name!r}")
    threads = cfg.threads or (os.cpu_count() or 1)
    np.random.seed(cfg.seed)
    os.makedirs(cfg.output, exist_ok=True)
    start = time.perf_counter()
    written: List[str] = []
    try:
        tables = exp.runner(cfg, threads)
        for name, (cols, rows) in tables.items():
            path = os.path.join(cfg.output, f"{exp.name}_{name}.csv")
            with open(path, "w") as fh:
                fh.write(",".join(cols) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(v) for v in row) + "\n")
            written.append(path)
        meta = {"config": {"experiment": cfg.experiment, "parameters": cfg.parameters,
                           "grid": cfg.grid, "seed": cfg.seed, "threads": threads},
                "version": __version__, "wall_time": time.perf_counter() - start,
                "files": [os.path.basename(p) for p in written]}
        mpath = os.path.join(cfg.output, f"{exp.name}.meta.json")
        with open(mpath, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
        written.append(mpath)
    except BaseException:
        for p in written:
            if os.path.exists(p):
                os.remove(p)
        raise
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="hypwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    pr = sub.add_parser("run", help="run an experiment from a JSON config")
    pr.add_argument("config")
    pr.add_argument("--out", default=None, help="output directory")
    pr.add_argument("--threads", type=int, default=None)
    pr.add_argument("--seed", type=int, default=None)
    sub.add_parser("list", help="print the experiment catalog")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="hypwave: %(message)s")

    if args.command == "list":
        sys.stdout.write(list_experiments())
        return 0
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        cfg = ExperimentConfig.from_dict(raw)
        if args.out is not None:
            cfg.output = args.out
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        for p in run(cfg):
            print(p)
        return 0
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    except (NumericalError, ArithmeticError, HypwaveError) as exc:
        log.error("numerical failure: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
