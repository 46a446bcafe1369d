import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from hypwave import dissipative as Dp
from hypwave.errors import ConfigError

A1 = np.array([[0.0, 1.0], [1.0, 0.0]])


def speed_system():
    a = lambda t: math.sqrt(2.0 + math.sin(math.log1p(t)))
    return Dp.PartiallyDissipativeSystem([lambda t: a(t) * A1], lambda t: np.diag([0.0, 1.0]), 2)


def test_kalman_rank_examples():
    w = [1.0]
    assert Dp.kalman_rank(Dp.test_system(np.zeros((2, 2))), 0.0, w)["rank"] == 0
    assert Dp.kalman_rank(Dp.test_system(np.eye(2)), 0.0, w)["rank"] == 2
    r = Dp.kalman_rank(Dp.test_system(), 0.0, w)
    assert r["rank"] == 2 and r["min_singular_value"] > 0.5
    # B commuting with A and singular: dissipation never reaches the kernel
    P = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    assert Dp.kalman_rank(Dp.test_system(P), 0.0, w)["rank"] == 1
    with pytest.raises(ConfigError):
        Dp.kalman_rank(Dp.test_system(), 0.0, [2.0])


def test_kalman_certificate():
    dirs = [[1.0], [-1.0]]
    assert Dp.kalman_certificate(Dp.test_system(), [1.0, 1.0], [0.0], dirs) == pytest.approx(1.0)
    assert Dp.kalman_certificate(Dp.test_system(np.zeros((2, 2))), [1.0, 1.0], [0.0], dirs) == 0.0


def test_structural_checks():
    c = Dp.test_system().check()
    assert c["B1"] and c["B2"]
    bad = Dp.test_system(np.diag([-1.0, 1.0])).check()
    assert not bad["B1"]


def test_lyapunov_functional_reduces_to_norm():
    U = np.array([1.0 + 2j, -0.5j])
    s = Dp.test_system()
    assert Dp.lyapunov_functional(s, U, 0.0, 0.7, [0.0]) == pytest.approx(float(np.vdot(U, U).real))


def test_propagator_matches_expm():
    s = Dp.test_system()
    for xi in (0.05, 1.0, 5.0):
        E = Dp._propagator(s, 3.0, 0.0, xi)
        assert E == pytest.approx(expm(3.0 * (1j * xi * A1 - np.diag([0.0, 1.0]))), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(xi=st.floats(0.01, 20.0), t=st.floats(0.0, 50.0))
def test_no_dissipation_is_unitary(xi, t):
    E = Dp._propagator(Dp.test_system(np.zeros((2, 2))), t, 0.0, xi)
    assert np.linalg.svd(E, compute_uv=False) == pytest.approx([1.0, 1.0], abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(xi=st.floats(0.01, 20.0), t1=st.floats(0.0, 20.0), t2=st.floats(0.0, 20.0))
def test_dissipation_contracts(xi, t1, t2):
    s = Dp.test_system()
    a, b = sorted((t1, t2))
    na = np.linalg.norm(Dp._propagator(s, a, 0.0, xi), 2)
    nb = np.linalg.norm(Dp._propagator(s, b, 0.0, xi), 2)
    assert nb <= na * (1 + 1e-10) <= 1 + 1e-9


def test_lyapunov_decay_for_test_system():
    r = Dp.lyapunov_decay_verify(Dp.test_system(), [0.05, 1.0, 5.0], np.linspace(0.0, 40.0, 9),
                                 samples=4)
    assert 0.25 <= r.sandwich_lo <= r.sandwich_hi <= 4.0
    assert r.gamma > 0 and r.gamma_functional > 0 and r.violations == 0


def test_small_frequency_parabolic_constant_system():
    pc = Dp.small_freq_diag(Dp.test_system(), 1.0, 0.01)["parabolic"]
    assert pc.alpha(1.0) == pytest.approx(1.0, abs=1e-10)
    assert abs(pc.beta(1.0)) < 1e-10 and abs(pc.gamma(1.0)) < 1e-12


def test_small_frequency_parabolic_time_dependent():
    # with A = a(t) A1 the upper-left entry is i a(t)^2 xi^2
    pc = Dp.small_freq_diag(speed_system(), 0.0, 0.01)["parabolic"]
    for t in (0.0, 3.0, 50.0):
        assert pc.alpha(t).real == pytest.approx(2.0 + math.sin(math.log1p(t)), abs=1e-9)
    assert pc.positivity([0.0, 10.0, 100.0]) > 0


def test_parabolic_reference_matches_ode():
    pc = Dp.small_freq_diag(speed_system(), 0.0, 0.01)["parabolic"]
    xi, t = 0.3, 5.0
    ref = Dp.parabolic_reference_solve(pc, 1.0, t, xi)
    alpha = lambda s: 2.0 + math.sin(math.log1p(s))
    sol = solve_ivp(lambda s, y: [-alpha(s) * xi * xi * y[0]], (0.0, t), [1.0], method="DOP853",
                    rtol=1e-13, atol=1e-15)
    assert abs(ref - sol.y[0, -1]) <= 1e-9


def test_small_freq_diag_blocks():
    r = Dp.small_freq_diag(Dp.test_system(), 1.0, 0.05)
    assert r["M"] == pytest.approx(np.eye(2), abs=1e-14)
    assert r["R1"] == pytest.approx(0.05 * A1, abs=1e-12)
    with pytest.raises(ConfigError):
        Dp.small_freq_diag(Dp.test_system(), 1.0, 0.05, k=3)


def test_low_frequency_expansion():
    r = Dp.low_frequency_multiplier_check(np.geomspace(1.0, 1e3, 20), np.linspace(1e-3, 0.3, 300))
    assert r["b2"] == pytest.approx(1.0, abs=1e-4)
    assert all(np.isfinite(r[k]) for k in ("phase", "C0", "C1"))
    with pytest.raises(ConfigError):
        Dp.low_frequency_multiplier_check([1.0], [0.6])


def test_diffusion_difference_shrinks_relative_to_heat():
    g = np.linspace(1e-4, 20.0, 4000)
    u0 = np.exp(-g ** 2)
    rows = Dp.diffusion_scan(u0, np.zeros_like(u0), g, [10.0, 100.0])
    assert rows.ratio[1] < rows.ratio[0] / 5
    with pytest.raises(ConfigError):
        Dp.diffusion_difference(u0, u0, g, 1.0, k=2)


def test_sup_norm_decay_rate():
    times = np.geomspace(50.0, 500.0, 6)
    sup, l1 = Dp.sup_norm_decay(lambda a: np.exp(-a * a), times)
    slope = np.polyfit(np.log(times), np.log(sup), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.03)
    assert l1 == pytest.approx(math.sqrt(math.pi), rel=1e-6)


def test_profile_compare_rejects_time_dependent():
    with pytest.raises(ConfigError):
        Dp.diffusion_profile_compare(speed_system(), lambda x: np.ones(2), [10.0])
