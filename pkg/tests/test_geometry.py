import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hypwave import geometry as G
from hypwave.errors import ConfigError, InsufficientRange, NoFiniteIndex


def radial_bump(r):
    u = 2 * np.asarray(r, dtype=float) - 3.0
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(1 - 1 / (1 - u[m] ** 2))
    return out


def amp(r, om):
    return radial_bump(r) * (1.0 + 0.3 * om[:, :1])


@pytest.mark.parametrize("surf", [G.sphere(2), G.sphere(3), G.ellipse(), G.quartic(), G.wavefront_curve(0.1)])
def test_homogeneity_and_points(surf):
    assert surf.check_homogeneity()["homogeneous"]
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(5, surf.n))
    pts = surf.point(dirs)
    assert surf(pts) == pytest.approx(np.ones(5), abs=1e-13)


def test_local_graph_curvatures():
    assert G.local_graph(G.sphere(2), [1.0, 0.0]).coefficients[(2,)] == pytest.approx(-0.5, abs=1e-8)
    # ellipse with semi-axes 1 and 1/2: curvature a/b^2 = 4 and b/a^2 = 1/2
    e = G.ellipse()
    assert G.local_graph(e, [1.0, 0.0]).coefficients[(2,)] == pytest.approx(-2.0, abs=1e-7)
    assert G.local_graph(e, [0.0, 0.5]).coefficients[(2,)] == pytest.approx(-0.25, abs=1e-8)
    # unit sphere in R^3: h(y) = -|y|^2/2 - |y|^4/8 - ...
    g3 = G.local_graph(G.sphere(3), [0.0, 0.0, 1.0], radius=0.1).coefficients
    assert g3[(2, 0)] == pytest.approx(-0.5, abs=1e-7) and g3[(0, 2)] == pytest.approx(-0.5, abs=1e-7)
    assert abs(g3[(1, 1)]) < 1e-10
    assert g3[(4, 0)] == pytest.approx(-0.125, abs=1e-4) and g3[(2, 2)] == pytest.approx(-0.25, abs=1e-3)


def test_local_graph_rejects_off_surface():
    with pytest.raises(ConfigError):
        G.local_graph(G.sphere(2), [2.0, 0.0])


def test_sphere_ray_derivatives_exact():
    # h(y) = sqrt(1 - y^2) - 1
    d = G.ray_derivatives(G.sphere(2), [1.0, 0.0], [1.0], order=4)
    assert d[:5] == pytest.approx([0.0, 0.0, -1.0, 0.0, -3.0], abs=1e-6)


def test_quartic_flat_point():
    d = G.ray_derivatives(G.quartic(), [1.0, 0.0], [1.0], order=4)
    assert d[2] == pytest.approx(0.0, abs=1e-8) and d[3] == pytest.approx(0.0, abs=1e-7)
    assert abs(d[4]) > 1.0


@pytest.mark.parametrize("surf,gamma,gamma0,convex", [
    (G.sphere(2), 2, 2, True), (G.ellipse(), 2, 2, True), (G.quartic(), 4, 4, True),
    (G.wavefront_curve(0.1), 3, 3, False), (G.sphere(3), 2, 2, True)])
def test_contact_indices(surf, gamma, gamma0, convex):
    rep = G.contact_indices(surf)
    assert (rep.gamma, rep.gamma0, rep.convex) == (gamma, gamma0, convex)


def test_mildly_perturbed_circle_stays_convex():
    rep = G.contact_indices(G.wavefront_curve(0.03))
    assert rep.convex and rep.gamma == 2


def test_family_indices():
    assert G.family_index(lambda t: G.blend(math.exp(-t)), [0.0, 1.0, 4.0, 8.0, 16.0, 30.0], "uniform") == 4
    assert G.family_index(lambda t: G.blend(math.exp(-t)), [0.0, 1.0, 4.0, 8.0, 16.0, 30.0], "asymptotic") == 2
    assert G.family_index(lambda t: G.sphere(2, 1.0 + 0.5 * math.sin(t)), np.linspace(0, 6, 7)) == 2
    with pytest.raises(NoFiniteIndex):
        G.family_index(lambda t: G.sphere(2, t), np.geomspace(1.0, 1e8, 6))
    with pytest.raises(ConfigError):
        G.family_index(lambda t: G.sphere(2), [1.0], "sometimes")


@settings(max_examples=40, deadline=None)
@given(k=st.floats(-200.0, 200.0), c=st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_filon_exact_for_quadratics(k, c):
    a, b = 1.0, 2.0
    r = np.linspace(a, b, 9)
    f = c[0] + c[1] * r + c[2] * r * r
    val = G.filon_linear(k, f, a, b)[0]
    g = lambda x: c[0] + c[1] * x + c[2] * x * x
    re = quad(lambda x: g(x) * math.cos(k * x), a, b, limit=400, epsabs=1e-13)[0]
    im = quad(lambda x: g(x) * math.sin(k * x), a, b, limit=400, epsabs=1e-13)[0]
    assert abs(val - (re + 1j * im)) <= 1e-10 * (1 + abs(re + 1j * im))


def test_filon_node_count():
    with pytest.raises(ConfigError):
        G.filon_linear(1.0, np.ones(4), 0.0, 1.0)


def dense_reference(phase, t, x):
    # plain trapezoid rule in polar coordinates on a fine grid
    r = np.linspace(1.0, 2.0, 6001)
    a = 2 * np.pi * np.arange(1024) / 1024
    om = np.column_stack([np.cos(a), np.sin(a)])
    ph = (om @ x)[:, None] * r[None, :] + t * phase(om)[:, None] * r[None, :]
    f = np.exp(1j * ph) * amp(r[None, :], om) * r[None, :]
    return complex(np.trapezoid(f, r, axis=1).sum() * 2 * np.pi / 1024)


@pytest.mark.parametrize("surf", [G.sphere(2), G.quartic(), G.wavefront_curve(0.1)])
def test_oscillatory_integral_against_dense_quadrature(surf):
    x = np.array([1.3, -0.4])
    for t in (0.0, 7.0):
        val = G.oscillatory_integral(surf.phase, amp, t, x, rel_tol=1e-9)
        assert abs(val - dense_reference(surf.phase, t, x)) <= 1e-7 * max(1.0, abs(val))


def test_oscillatory_integral_at_origin():
    ref = 2 * math.pi * quad(lambda r: float(radial_bump(r)) * r, 1.0, 2.0, epsabs=1e-14)[0]
    val = G.oscillatory_integral(G.sphere(2).phase, lambda r, om: radial_bump(r) * np.ones((om.shape[0], 1)),
                                 0.0, [0.0, 0.0], rel_tol=1e-10)
    assert val == pytest.approx(ref, rel=1e-9)


def test_radial_integral_3d_matches_quad():
    t, r = 9.0, 4.0
    f = lambda rho: float(radial_bump(rho)) * rho * math.sin(r * rho)
    re = quad(lambda s: f(s) * math.cos(t * s), 1.0, 2.0, limit=400, epsabs=1e-14)[0]
    im = quad(lambda s: f(s) * math.sin(t * s), 1.0, 2.0, limit=400, epsabs=1e-14)[0]
    ref = 4 * math.pi / r * (re + 1j * im)
    assert G.radial_integral_3d(radial_bump, t, r) == pytest.approx(ref, rel=1e-8)


def test_decay_fit_exact_and_noisy():
    t = np.geomspace(10.0, 1e3, 16)
    f = G.decay_fit(t, 3.0 * t ** -0.75)
    assert f.exponent == pytest.approx(-0.75, abs=1e-12)
    assert f.hi - f.lo < 1e-10 and f.used == 8
    rng = np.random.default_rng(1)
    noisy = G.decay_fit(t, t ** -1.0 * np.exp(0.05 * rng.normal(size=16)))
    assert noisy.lo <= -1.0 <= noisy.hi
    assert G.decay_fit(t, np.full(16, 2.0)).exponent == pytest.approx(0.0, abs=1e-12)


def test_decay_fit_errors():
    with pytest.raises(InsufficientRange):
        G.decay_fit([1.0, 2.0, 3.0], [1.0, 1.0, 1.0])
    t = np.geomspace(1.0, 100.0, 10)
    with pytest.raises(InsufficientRange):
        G.decay_fit(t, -t)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-3.0, 3.0), c=st.floats(0.1, 10.0))
def test_power_slope_recovers_exponent(p, c):
    t = np.geomspace(1.0, 1e4, 12)
    s, ic = G.power_slope(t, c * t ** p)
    assert s == pytest.approx(p, abs=1e-10) and ic == pytest.approx(math.log(c), abs=1e-9)
