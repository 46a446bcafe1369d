import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwave import phasespace as PS
from hypwave.errors import ConfigError


def test_zone_classification():
    cfg = PS.ZoneConfig(c=1.0, ell_cutoff=0.1)
    assert PS.classify(0.0, 2.0, cfg) == PS.ZoneLabel.HYP
    assert PS.classify(0.0, 0.5, cfg) == PS.ZoneLabel.PD
    assert PS.classify(50.0, 0.05, cfg) == PS.ZoneLabel.HYP | PS.ZoneLabel.ELL
    assert PS.t_xi(0.25, cfg) == pytest.approx(3.0)
    assert PS.t_xi(5.0, cfg) == 0.0
    with pytest.raises(ConfigError):
        PS.classify(-1.0, 1.0)
    with pytest.raises(ConfigError):
        PS.ZoneConfig(c=0.0)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.0, 1e4), xi=st.floats(1e-4, 1e3))
def test_zone_boundary_consistent_with_t_xi(t, xi):
    hyp = bool(PS.classify(t, xi) & PS.ZoneLabel.HYP)
    s = PS.t_xi(xi)
    if abs(t - s) > 1e-9 * (1 + s):
        assert hyp == (t > s)
    if xi < 1:
        assert (1 + s) * xi == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-2.0, 3.0), v=st.floats(-2.0, 3.0))
def test_smooth_step_monotone_and_bounded(u, v):
    a, b = PS.smooth_step(min(u, v)), PS.smooth_step(max(u, v))
    assert 0.0 <= a <= b <= 1.0


def test_chi_hyp_values():
    assert PS.chi_hyp(0.0, 0.5) == 0.0
    assert PS.chi_hyp(0.0, 2.0) == 1.0
    assert PS.smooth_step(0.5) == pytest.approx(0.5)
    assert 0 < PS.chi_hyp(0.0, 1.5) < 1


def test_mixed_derivative_polynomial():
    f = lambda t, x: t ** 3 * x ** 2 + math.sin(t) * x
    d = PS.mixed_derivative(f, 1.3, 0.7, 2, 1, 1e-2, 1e-2)
    exact = 6 * 1.3 * 2 * 0.7 - math.sin(1.3)
    assert d == pytest.approx(exact, rel=1e-7)


def test_symbol_fit_of_modulus():
    # |xi| lies in S{1, 0}: the zeroth constant is at most 1 and is attained
    s = PS.SymbolSample(lambda t, x: x, t_range=(0.0, 100.0), xi_range=(1e-2, 10.0), points=12)
    tab = PS.symbol_class_fit(s, 1.0, 0.0, max_k=1, max_alpha=2)
    assert tab.constant(0, 0) == pytest.approx(1.0, rel=1e-12)
    assert tab.constant(0, 1) == pytest.approx(1.0, rel=1e-6)
    assert tab.constant(0, 2) < 1e-4
    assert tab.constant(1, 0) < 1e-4
    assert tab.finite


def test_symbol_fit_of_damping_in_lower_class():
    # b(t) = 1/(1+t) lies in S{0, 1}
    s = PS.SymbolSample(lambda t, x: 1.0 / (1.0 + t), t_range=(0.0, 1e3), xi_range=(1e-2, 10.0), points=10)
    tab = PS.symbol_class_fit(s, 0.0, 1.0, max_k=2, max_alpha=1)
    assert tab.constant(0, 0) == pytest.approx(1.0, rel=1e-9)
    assert tab.constant(1, 0) == pytest.approx(1.0, rel=1e-5)
    assert tab.constant(2, 0) == pytest.approx(2.0, rel=1e-4)


def test_t_class_fit_factorials():
    tab = PS.t_class_fit(lambda t: 1.0 / (1.0 + t), 1.0, (0.0, 100.0), max_k=3, points=40)
    for k in range(4):
        assert tab.constant(k) == pytest.approx(math.factorial(k), rel=1e-4)


def test_t_class_fit_detects_non_decay():
    # sin(t) is not in T{1}: the weighted constant grows with the range
    c1 = PS.t_class_fit(math.sin, 1.0, (0.0, 10.0), max_k=0).constant(0)
    c2 = PS.t_class_fit(math.sin, 1.0, (0.0, 1000.0), max_k=0).constant(0)
    assert c2 > 50 * c1


def test_sample_validation():
    with pytest.raises(ConfigError):
        PS.SymbolSample(lambda t, x: x, t_range=(5.0, 1.0))
    with pytest.raises(ConfigError):
        PS.symbol_class_fit(PS.SymbolSample(lambda t, x: x), 1, 0, max_k=4)
