"""Tests for product targets and their component densities."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from core.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteError,
    UnsupportedError,
)
from core.rng_core import RngStream
from core.targets import ComponentDensity, GaussianComponent, TargetModel, fisher_info, log_pi, make_target


class LaplaceComponent(ComponentDensity):
    """Component without an analytic Fisher information override."""

    name = "laplace"

    def log_density(self, x):
        return -np.abs(np.asarray(x, dtype=float)) - math.log(2.0)

    def score(self, x):
        return -np.sign(np.asarray(x, dtype=float))

    def second_score(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def cdf(self, x):
        return stats.laplace.cdf(x)

    def sample(self, stream, size):
        return stats.laplace.ppf(stream.uniform(size))


def test_log_pi_standard_normal_origin(std_normal_2d):
    assert log_pi(std_normal_2d, [0.0, 0.0]) == pytest.approx(-1.8378770664093453, abs=1e-12)


def test_log_pi_one_dimensional(std_normal_1d):
    assert log_pi(std_normal_1d, [1.0]) == pytest.approx(-1.4189385332046727, abs=1e-12)


def test_log_pi_is_a_sum_of_independent_components():
    model = make_target("gaussian", 5.0, 3)
    x = [1.0, 2.0, 3.0]
    expected = float(np.sum(stats.norm(0.0, math.sqrt(5.0)).logpdf(x)))
    assert log_pi(model, x) == pytest.approx(expected, abs=1e-12)


def test_log_pi_of_rows():
    model = make_target("gaussian", 1.0, 2)
    rows = np.array([[0.0, 0.0], [1.0, 1.0]])
    values = model.log_pi(rows)
    assert values.shape == (2,)
    assert values[0] - values[1] == pytest.approx(1.0)


def test_log_pi_handles_large_coordinates():
    model = make_target("gaussian", 1.0, 2)
    value = log_pi(model, [1e6, -1e6])
    assert np.isfinite(value)
    assert value == pytest.approx(-1e12 - math.log(2.0 * math.pi), rel=1e-12)


def test_density_integrates_to_one():
    component = GaussianComponent(2.5)
    sigma = math.sqrt(2.5)
    total, _ = integrate.quad(lambda x: math.exp(float(component.log_density(x))), -10 * sigma, 10 * sigma)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("variance, expected", [(1.0, 1.0), (4.0, 0.25), (5.0, 0.2)])
def test_fisher_info_is_inverse_variance(variance, expected):
    assert fisher_info(make_target("gaussian", variance, 3)) == pytest.approx(expected)


def test_fisher_info_matches_mean_squared_score():
    component = GaussianComponent(4.0)
    x = component.sample(RngStream(11, 0), 10 ** 6)
    squared = component.score(x) ** 2
    stderr = np.std(squared) / math.sqrt(x.size)
    assert abs(np.mean(squared) - component.fisher_info()) < 3 * stderr


def test_score_matches_finite_difference():
    component = GaussianComponent(3.0)
    grid = np.linspace(-4.0, 4.0, 17)
    h = 1e-5
    numeric = (component.log_density(grid + h) - component.log_density(grid - h)) / (2 * h)
    np.testing.assert_allclose(component.score(grid), numeric, rtol=1e-6, atol=1e-8)


def test_second_score_matches_finite_difference():
    component = GaussianComponent(3.0)
    grid = np.linspace(-4.0, 4.0, 17)
    h = 1e-4
    numeric = (component.score(grid + h) - component.score(grid - h)) / (2 * h)
    np.testing.assert_allclose(component.second_score(grid), numeric, rtol=1e-4)


def test_curvature_ratio_is_f_second_over_f():
    component = GaussianComponent(1.0)
    x = np.array([-2.0, 0.0, 0.5, 3.0])
    np.testing.assert_allclose(component.curvature_ratio(x), x ** 2 - 1.0)


@given(st.floats(min_value=-50, max_value=50), st.floats(min_value=0.0, max_value=10.0))
def test_cdf_is_monotone(x, step):
    component = GaussianComponent(2.0)
    assert component.cdf(x + step) >= component.cdf(x)


def test_cdf_limits():
    component = GaussianComponent(1.0)
    assert component.cdf(-40.0) == pytest.approx(0.0, abs=1e-300)
    assert component.cdf(40.0) == 1.0
    assert component.cdf(0.0) == pytest.approx(0.5)


def test_dimension_mismatch_is_rejected(std_normal_2d):
    with pytest.raises(DimensionMismatchError):
        log_pi(std_normal_2d, [0.0, 0.0, 0.0])


def test_non_finite_state_is_rejected(std_normal_2d):
    with pytest.raises(NonFiniteError):
        log_pi(std_normal_2d, [0.0, math.nan])


@pytest.mark.parametrize("d", [0, -1, 2.0])
def test_target_dimension_must_be_positive_integer(d):
    with pytest.raises(InvalidParameterError):
        TargetModel(GaussianComponent(), d)


def test_variance_must_be_positive():
    with pytest.raises(InvalidParameterError):
        GaussianComponent(0.0)


def test_unknown_component_is_unsupported():
    with pytest.raises(UnsupportedError):
        make_target("cauchy", 1.0, 2)


def test_component_without_analytic_fisher_info():
    model = TargetModel(LaplaceComponent(), 3)
    with pytest.raises(UnsupportedError):
        model.fisher_info()
    assert model.log_pi([0.0, 0.0, 0.0]) == pytest.approx(-3 * math.log(2.0))


def test_describe():
    assert make_target("gaussian", 2.0, 4).describe() == {"component": "gaussian", "variance": 2.0, "d": 4}
