import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from hypwave import diag as D
from hypwave import propagate as P
from hypwave.errors import TailTooLarge, ZoneViolation


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-1, 1), t=st.floats(-3, 3))
def test_constant_generator_matches_expm(a, b, c, t):
    C = np.array([[a, b], [c, 1j * abs(c)]], dtype=complex)
    E = P.integrate_fundamental(lambda s, x: C, t, 0.0, 1.0, tol=1e-12).value
    assert np.max(np.abs(E - expm(1j * t * C))) <= 1e-9 * max(1.0, np.max(np.abs(E)))


def test_cocycle_property():
    C = lambda s, x: np.array([[0.0, x], [x, 1j / (1 + s)]], dtype=complex)
    E1 = P.integrate_fundamental(C, 2.0, 0.5, 1.3, 1e-12)
    E2 = P.integrate_fundamental(C, 5.0, 2.0, 1.3, 1e-12)
    E3 = P.integrate_fundamental(C, 5.0, 0.5, 1.3, 1e-12)
    assert E2 @ E1 == pytest.approx(E3.value, abs=1e-9)
    back = P.integrate_fundamental(C, 0.5, 5.0, 1.3, 1e-12)
    assert back @ E3 == pytest.approx(np.eye(2), abs=1e-9)


def test_diag_exponential_closed_form():
    Dg = lambda s, x: np.array([x + 1j / (1 + s), -x])
    E = P.diag_exponential(Dg, 4.0, 1.0, 2.0).value
    assert E[0, 0] == pytest.approx(np.exp(1j * 2.0 * 3.0) * (2.0 / 5.0), rel=1e-10)
    assert E[1, 1] == pytest.approx(np.exp(-1j * 6.0), rel=1e-10)
    assert E[0, 1] == 0


def test_peano_baker_constant_remainder():
    R = np.array([[0.1, 0.2], [0.05, -0.1]], dtype=complex)
    Q = P.peano_baker(lambda s, x: R, lambda s, x: np.zeros(2), 2.0, 0.0, 1.0, L=10)
    exact = expm(1j * 2.0 * R)
    assert np.max(np.abs(Q.value - exact)) <= max(Q.est_error, 1e-12) + 1e-11
    assert Q.weight == pytest.approx(2.0 * np.linalg.norm(R, 2), rel=1e-9)


@pytest.mark.parametrize("L", [1, 2, 4])
def test_peano_baker_tail_bound_holds(L):
    R = lambda s, x: np.array([[0.0, 0.3 / (1 + s)], [0.3 / (1 + s), 0.0]], dtype=complex)
    Dg = lambda s, x: np.array([x, -x])
    Q = P.peano_baker(R, Dg, 6.0, 0.0, 1.5, L=L)
    exact = P.integrate_fundamental(lambda s, x: np.diag(Dg(s, x)) + R(s, x), 6.0, 0.0, 1.5, 1e-12).value
    Ek = P.diag_exponential(Dg, 6.0, 0.0, 1.5).value
    assert np.linalg.norm(Ek @ Q.value - exact, 2) <= Q.est_error + 1e-9


def test_peano_baker_tail_error():
    R = lambda s, x: 5.0 * np.eye(2, dtype=complex)
    with pytest.raises(TailTooLarge):
        P.peano_baker(R, lambda s, x: np.zeros(2), 3.0, 0.0, 1.0, L=2, tol=1e-6)


def test_tabulate_accuracy():
    f = lambda t: np.array([[1.0 / (1 + t), math.sin(math.log1p(t))]])
    g = P.tabulate(f, 0.0, 1e3, 48)
    for t in (0.3, 7.0, 111.0, 999.0):
        assert g(t) == pytest.approx(f(t), abs=1e-12)


def test_hierarchy_fundamental_matches_direct():
    h = D.Hierarchy(D.damped_wave_system(lambda t: 0.5 / (1.0 + t)), 2)
    rng = np.random.default_rng(3)
    for _ in range(4):
        xi = float(np.exp(rng.uniform(math.log(0.2), math.log(20.0))))
        s = D.zone_entry(h, xi) + float(rng.uniform(0.0, 20.0))
        t = s + float(rng.uniform(0.5, 50.0))
        a = P.hierarchy_fundamental(h, t, s, xi, L=8, nodes=32).value
        b = P.integrate_fundamental(h.system.full, t, s, xi, 1e-12).value
        assert np.linalg.norm(a - b, 2) <= 1e-8


def test_amplitudes_reconstruct_and_converge():
    h = D.Hierarchy(D.damped_wave_system(lambda t: 0.5 / (1.0 + t) ** 2), 2)
    rep = P.extract_amplitudes(h, np.geomspace(10.0, 1e3, 8), 2.0)
    assert rep.phases[-1] == pytest.approx([-2.0, 2.0], abs=1e-3)
    i = 3
    t = rep.times[i]
    E = sum(np.exp(1j * t * rep.phases[i, j]) * rep.B[i, j] for j in range(2))
    direct = P.integrate_fundamental(h.system.full, t, 0.0, 2.0, 1e-12).value
    assert np.max(np.abs(E - direct)) <= 1e-8
    # integrable damping: amplitudes converge, residual to the last one decreases
    assert np.all(np.diff(rep.residual[:-1, 0]) < 0)
    assert rep.cauchy < 1e-3


def test_amplitudes_reject_grid_below_zone():
    h = D.Hierarchy(D.damped_wave_system(lambda t: 0.1), 1)
    with pytest.raises(ZoneViolation):
        P.extract_amplitudes(h, [1.0, 10.0], 0.1)
