import os
import subprocess
import sys

import numpy as np
import pytest

from hypwave import _pykernels as py

ck = pytest.importorskip("hypwave._ckernels")

EMPTY = np.zeros(0)


@pytest.mark.parametrize("rho,x", [(0.0, 1.0), (0.25, 3.5), (1.5, 0.2), (-0.3, 2.0)])
def test_bessel_series_agree(rho, x):
    a, na = py.bessel_series(rho, x, 200, 1e-18)
    b, nb = ck.bessel_series(rho, x, 200, 1e-18)
    assert a == pytest.approx(b, rel=1e-14) and na == nb


@pytest.mark.parametrize("nu,x,count", [(0.0, 7.0, 5), (0.3, 12.0, 3), (2.5, 15.0, 2)])
def test_miller_agree(nu, x, count):
    assert np.asarray(py.miller_j(nu, x, count)) == pytest.approx(np.asarray(ck.miller_j(nu, x, count)), rel=1e-13)


@pytest.mark.parametrize("a,b,z", [(0.5, 1.0, 2.0 + 0j), (1.3, 2.6, 7j), (0.2, 0.4, -3.0 + 1j)])
def test_kummer_series_agree(a, b, z):
    s1, n1 = py.kummer_series(complex(a), complex(b), z, 500, 1e-17)
    s2, n2 = ck.kummer_series(complex(a), complex(b), z, 500, 1e-17)
    assert s1 == pytest.approx(s2, rel=1e-14) and n1 == n2


def test_kummer_walk_agree():
    args = (0.7 + 0j, 1.4 + 0j, 6j, 1.0 + 0.5j, 0.2 - 0.1j, 30j, 2.0, 80)
    w1, d1 = py.kummer_walk(*args)
    w2, d2 = ck.kummer_walk(*args)
    assert w1 == pytest.approx(w2, rel=1e-13) and d1 == pytest.approx(d2, rel=1e-13)


def test_coefficient_and_hill_agree():
    tau, delta, eta, nn = (np.array(v, dtype=float) for v in ([8.0, 64.0], [1.0, 8.0], [1.0, 1.0], [3.0, 8.0]))
    for t in (0.0, 8.1, 8.5, 70.0, 100.0):
        assert py.coefficient_value(t, 1, 0.5, 0.5, 0.5, tau, delta, eta, nn) == pytest.approx(
            ck.coefficient_value(t, 1, 0.5, 0.5, 0.5, tau, delta, eta, nn), rel=1e-15)
    y0 = np.array([1.0, 0.0, 0.0, 1.0])
    ya, _ = py.hill_propagate(3.1, 0.0, 1.0, y0, 0, 0.2, 0.5, 0.5, EMPTY, EMPTY, EMPTY, EMPTY,
                              1e-12, 1e-14, 1e300)
    yb, _ = ck.hill_propagate(3.1, 0.0, 1.0, y0, 0, 0.2, 0.5, 0.5, EMPTY, EMPTY, EMPTY, EMPTY,
                              1e-12, 1e-14, 1e300)
    assert np.asarray(ya) == pytest.approx(np.asarray(yb), abs=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, HYPWAVE_PURE_PYTHON="1")
    code = ("import hypwave, hypwave.specfun as s, hypwave.floquet as F; "
            "print(hypwave.BACKEND, repr(s.bessel_j(0.25, 7.5)), "
            "repr(F.monodromy(F.PeriodicCoefficient(0.2), 3.0).kappa))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, j, kappa = out.stdout.split()
    assert backend == "python"
    from hypwave import specfun, floquet
    assert float(j) == pytest.approx(specfun.bessel_j(0.25, 7.5), rel=1e-13)
    assert float(kappa) == pytest.approx(floquet.monodromy(floquet.PeriodicCoefficient(0.2), 3.0).kappa,
                                         rel=1e-8, abs=1e-12)
