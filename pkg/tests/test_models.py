import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from hypwave import models as M
from hypwave.errors import ConfigError, SupportError


def ode_multiplier(damp, stiff, t0, t, tol=1e-12):
    """Columns: solutions of u'' + damp(s) u' + stiff(s) u = 0 with unit data at t0."""
    def rhs(s, y):
        return [y[1], -damp(s) * y[1] - stiff(s) * y[0]]
    cols = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        sol = solve_ivp(rhs, (t0, t), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
        cols.append(sol.y[:, -1])
    return np.array(cols).T


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 1.0, 1.5, 2.7])
@pytest.mark.parametrize("t,xi", [(3.0, 0.7), (12.0, 2.5), (1.5, 6.0)])
def test_sid_matches_ode(mu, t, xi):
    m = M.ModelSpec("ScaleInvariantDissipation", mu=mu)
    exact = M.exact_multiplier(m, t, xi)
    ref = ode_multiplier(lambda s: 2 * mu / s, lambda s: xi * xi, 1.0, t)
    assert np.max(np.abs(exact - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0, 1.7])
@pytest.mark.parametrize("t,xi", [(4.0, 1.0), (9.0, 3.0)])
def test_mass_model_matches_ode(kappa, t, xi):
    m = M.ModelSpec("ScaleInvariantMass", kappa=kappa)
    exact = M.exact_multiplier(m, t, xi)
    ref = ode_multiplier(lambda s: 0.0, lambda s: xi * xi + kappa ** 2 / (4 * s * s), 1.0, t)
    assert np.max(np.abs(exact - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))


def test_damped_and_klein_gordon_match_ode():
    for kind, damp, stiff_add in (("DampedWave", 1.0, 0.0), ("KleinGordon", 0.0, 1.0)):
        m = M.ModelSpec(kind)
        for t, xi in [(5.0, 0.2), (30.0, 2.0)]:
            ref = ode_multiplier(lambda s: damp, lambda s: xi * xi + stiff_add, 0.0, t)
            assert np.max(np.abs(M.exact_multiplier(m, t, xi) - ref)) <= 1e-9


def test_free_wave_is_cos_sin():
    m = M.ModelSpec("FreeWave")
    E = M.exact_multiplier(m, 2.0, 3.0)
    assert E == pytest.approx(np.array([[math.cos(6), math.sin(6) / 3], [-3 * math.sin(6), math.cos(6)]]))


def test_heat_multiplier():
    E = M.exact_multiplier(M.ModelSpec("Heat"), 2.0, 0.5)
    assert E[0, 0] == pytest.approx(math.exp(-0.5))


def test_variable_speed_and_weak_dissipation_numeric():
    a = lambda s: 2.0 + math.sin(s)
    m = M.ModelSpec("VariableSpeed", a=a)
    ref = ode_multiplier(lambda s: 0.0, lambda s: 4.0 * a(s) ** 2, 0.0, 3.0)
    assert np.max(np.abs(M.exact_multiplier(m, 3.0, 2.0) - ref)) <= 1e-7
    b = lambda s: 1.0 / (1.0 + s)
    m = M.ModelSpec("WeakDissipation", b=b)
    ref = ode_multiplier(b, lambda s: 1.0, 0.0, 3.0)
    assert np.max(np.abs(M.exact_multiplier(m, 3.0, 1.0) - ref)) <= 1e-7


def test_zero_frequency_limits():
    m = M.ModelSpec("ScaleInvariantDissipation", mu=0.3)
    E0 = M.exact_multiplier(m, 5.0, 0.0)
    Es = M.exact_multiplier(m, 5.0, 1e-6)
    assert np.max(np.abs(E0 - Es)) <= 1e-6


def test_model_validation():
    with pytest.raises(ConfigError):
        M.ModelSpec("Nope")
    with pytest.raises(ConfigError):
        M.ModelSpec("VariableSpeed")
    with pytest.raises(ConfigError):
        M.ModelSpec("ScaleInvariantDissipation", mu=-1.0)


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(0.5, 5.0), t2=st.floats(0.5, 5.0), xi=st.floats(0.05, 5.0))
def test_damped_semigroup_property(t1, t2, xi):
    m = M.ModelSpec("DampedWave")
    lhs = M.exact_multiplier(m, t1 + t2, xi)
    rhs = M.exact_multiplier(m, t2, xi) @ M.exact_multiplier(m, t1, xi)
    assert np.max(np.abs(lhs - rhs)) <= 1e-11


@settings(max_examples=25, deadline=None)
@given(t=st.floats(1.0, 40.0), xi=st.floats(0.05, 8.0), mu=st.floats(0.0, 2.0))
def test_sid_energy_nonincreasing(t, xi, mu):
    # the energy |xi u|^2 + |u_t|^2 is nonincreasing for nonnegative damping
    m = M.ModelSpec("ScaleInvariantDissipation", mu=mu)
    E = M.exact_multiplier(m, t, xi)
    for v in (np.array([1.0, 0.0]), np.array([0.0, xi])):
        u, ut = E @ v
        e1 = (xi * abs(u)) ** 2 + abs(ut) ** 2
        e0 = (xi * v[0]) ** 2 + v[1] ** 2
        assert e1 <= e0 * (1 + 1e-8)


def test_energy_and_weights():
    g = M.radial_grid(400, 1e-3, 10.0)
    w = M.radial_weights(g, 3)
    # integral of e^{-r^2} over R^3 = pi^{3/2}
    assert np.sum(w * np.exp(-g ** 2)) == pytest.approx(math.pi ** 1.5, rel=1e-3)
    st_ = M.FourierState(g, M.profile("gaussian", g), np.zeros_like(g), 0.0, 1)
    e = M.energy(M.evolve(M.ModelSpec("FreeWave"), st_, 3.0))
    assert e == pytest.approx(M.energy(st_), rel=1e-12)


def test_profiles():
    g = np.linspace(0.5, 5.0, 100)
    a = M.profile("annulus", g, lo=1.0, hi=4.0)
    assert np.all(a[g <= 1.0] == 0) and np.all(a[g >= 4.0] == 0)
    with pytest.raises(ConfigError):
        M.profile("square", g)


def test_scattering_profile_support_error():
    g = np.linspace(0.1, 2.0, 20)
    st_ = M.FourierState(g, np.ones(20), np.zeros(20), 1.0)
    with pytest.raises(SupportError):
        M.hf_scattering_profile(0.3, st_)


def test_scattering_defect_decreases():
    g = np.linspace(1.0, 4.0, 200)
    st_ = M.FourierState(g, M.profile("annulus", g), np.zeros(200), 1.0)
    prof = M.hf_scattering_profile(0.3, st_)
    d = [M.scattering_defect(0.3, st_, t, prof) for t in (10.0, 100.0, 1000.0)]
    assert d[0] > d[1] > d[2]
    assert d[2] == pytest.approx(d[0] / 100, rel=0.2)
