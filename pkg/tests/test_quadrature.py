import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdc_litho.errors import InvalidInterval, NonConvergent, NonFiniteIntegrand
from spdc_litho.opa_gain import CrystalParams
from spdc_litho.quadrature import (
    QuadSpec,
    adaptive_panels,
    integrate_1d,
    integrate_2d,
    kronrod_rule,
    truncate_omega_domain,
)


def test_polynomial_is_exact():
    res = integrate_1d(lambda x: x, 0.0, 1.0)
    assert abs(res.value - 0.5) < 1e-15
    assert res.error_estimate >= 0


def test_gaussian():
    res = integrate_1d(lambda x: np.exp(-x * x), -8, 8, vectorized=True)
    assert abs(res.value - math.sqrt(math.pi)) <= 1e-8 * math.sqrt(math.pi)


def test_oscillatory_against_dense_grid(oracle):
    res = integrate_1d(lambda x: np.cos(40 * x) / (1 + x * x), -10, 10, vectorized=True)
    ref = oracle["quad_cos40"]
    assert abs(res.value - ref) <= max(1e-12, 1e-8 * abs(ref))


def test_complex_integrand():
    # int_0^pi exp(ix) dx = 2i
    res = integrate_1d(lambda x: np.exp(1j * x), 0, math.pi, vectorized=True)
    assert abs(res.value - 2j) < 1e-12


def test_scalar_callable_matches_vectorized():
    f = lambda x: np.sin(3 * x) * np.exp(-x)
    a = integrate_1d(f, 0, 5).value
    b = integrate_1d(f, 0, 5, vectorized=True).value
    assert abs(a - b) < 1e-12


def test_vector_valued_integrand():
    res = integrate_1d(lambda x: np.stack([x, x * x], axis=-1), 0, 1, vectorized=True)
    assert np.allclose(res.value, [0.5, 1 / 3], atol=1e-14)


def test_breakpoints_help_with_kinks():
    res = integrate_1d(lambda x: np.abs(x - 0.3), 0, 1, vectorized=True, breakpoints=[0.3])
    assert abs(res.value - (0.3 ** 2 + 0.7 ** 2) / 2) < 1e-14


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf), (math.nan, 1.0)])
def test_invalid_interval(a, b):
    with pytest.raises(InvalidInterval):
        integrate_1d(lambda x: x, a, b)


def test_non_finite_integrand():
    with pytest.raises(NonFiniteIntegrand):
        integrate_1d(lambda x: np.where(x > 0.5, np.nan, 1.0), 0, 1, vectorized=True)


def test_budget_exhaustion():
    spec = QuadSpec(rel_tol=1e-12, abs_tol=0, max_subdivisions=5)
    with pytest.raises(NonConvergent):
        integrate_1d(lambda x: np.sin(1 / (x + 1e-3)), 0, 1, spec, vectorized=True)


def test_panels_reproduce_the_integral():
    f = lambda x: np.cos(40 * x) / (1 + x * x)
    res, panels = adaptive_panels(f, -10, 10, vectorized=True)
    assert np.all(np.diff(panels[:, 0]) > 0)
    assert panels[0, 0] == -10 and panels[-1, 1] == 10
    assert np.allclose(panels[1:, 0], panels[:-1, 1])
    x, w = kronrod_rule(panels)
    assert abs(np.sum(w * f(x)) - res.value) < 1e-15


@given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_linearity(alpha, beta):
    f = lambda x: np.exp(-x * x) * np.cos(5 * x)
    h = lambda x: 1 / (1 + x * x)
    lhs = integrate_1d(lambda x: alpha * f(x) + beta * h(x), -4, 4, vectorized=True).value
    rhs = (alpha * integrate_1d(f, -4, 4, vectorized=True).value
           + beta * integrate_1d(h, -4, 4, vectorized=True).value)
    assert abs(lhs - rhs) <= 1e-7 * (abs(alpha) + abs(beta)) + 1e-12


@given(c=st.floats(-2.9, 2.9))
@settings(max_examples=30, deadline=None)
def test_interval_additivity(c):
    f = lambda x: np.exp(1j * 3 * x) / (2 + np.sin(x))
    whole = integrate_1d(f, -3, 3, vectorized=True).value
    parts = integrate_1d(f, -3, c, vectorized=True).value + integrate_1d(f, c, 3, vectorized=True).value
    assert abs(whole - parts) <= 1e-8 * abs(whole) + 1e-12


def test_conjugation():
    f = lambda x: np.exp(1j * 7 * x) * (1 + x) ** 2
    a = integrate_1d(f, -1, 2, vectorized=True).value
    b = integrate_1d(lambda x: np.conj(f(x)), -1, 2, vectorized=True).value
    assert abs(np.conj(a) - b) <= 1e-15 * abs(a)


def test_2d_area_and_product():
    assert abs(integrate_2d(lambda x, y: 1.0, ((0, 1), (0, 2))).value - 2) < 1e-14
    assert abs(integrate_2d(lambda x, y: x * y, ((0, 1), (0, 1))).value - 0.25) < 1e-14


def test_2d_against_dense_grid(oracle):
    f = lambda x, y: np.exp(-x * x - y * y) * np.cos(x * y)
    res = integrate_2d(f, ((-6, 6), (-6, 6)), vectorized=True)
    ref = oracle["quad_gauss_cos"]
    assert abs(res.value - ref) <= 1e-8 * abs(ref)


def test_2d_invalid_domain():
    with pytest.raises(InvalidInterval):
        integrate_2d(lambda x, y: 1.0, ((1, 0), (0, 1)))


def test_quadspec_validation():
    for bad in ({"rel_tol": 0}, {"abs_tol": -1}, {"max_subdivisions": 0},
                {"max_subdivisions": 2.5}, {"tail_cut": 0}):
        with pytest.raises(ValueError):
            QuadSpec(**bad)
    spec = QuadSpec().tightened(10)
    assert spec.rel_tol == pytest.approx(1e-9)


def test_omega_window_formula():
    spec = QuadSpec(tail_cut=50)
    assert truncate_omega_domain(CrystalParams(g=1.0), spec) == pytest.approx((-math.sqrt(150), math.sqrt(150)))
    lo, hi = truncate_omega_domain(CrystalParams(g=0.0, omega0=2.0), spec)
    assert hi == pytest.approx(2 * math.sqrt(50)) and lo == -hi
    # large delta0 switches the gain term off
    assert truncate_omega_domain(CrystalParams(g=1.0, delta0=200.0), spec)[1] == pytest.approx(math.sqrt(50))
