"""Tests for the diffusion-limit calculus and optimal scaling."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.special import ndtr

from core.errors import InvalidParameterError, QuadratureError, UnsupportedError
from core.rng_core import RngStream, draw_std_normal_vec
from core.scaling import (
    QuadratureSpec,
    acceptance_atmcmc_closed_form,
    asymptotic_acceptance,
    asymptotic_acceptance_atmcmc,
    asymptotic_acceptance_rwmh,
    diffusion_speed,
    diffusion_speed_atmcmc,
    diffusion_speed_atmcmc_closed_form,
    diffusion_speed_rwmh,
    expected_min_exp,
    finite_dim_acceptance_rwmh,
    optimize_scaling,
    scaling_curves,
)

N_MC = 10 ** 6


@pytest.fixture(scope="module")
def normals():
    return draw_std_normal_vec(RngStream(31415, 0), N_MC, 1.0)


def test_expected_min_exp_at_origin():
    expected = 0.5 + math.exp(0.5) * float(ndtr(-1.0))
    assert expected_min_exp(0.0, 1.0) == pytest.approx(expected, abs=1e-12)
    assert expected_min_exp(0.0, 1.0) == pytest.approx(0.76158, abs=1e-4)


def test_expected_min_exp_large_mean_saturates():
    assert expected_min_exp(10.0, 1.0) == pytest.approx(1.0, abs=1e-4)
    assert expected_min_exp(10.0, 1.0) <= 1.0


def test_expected_min_exp_balanced_mean():
    # mu = -sigma^2 / 2 gives 2 Phi(-sigma / 2)
    assert expected_min_exp(-0.5, 1.0) == pytest.approx(2.0 * float(ndtr(-0.5)), abs=1e-12)


def test_expected_min_exp_stays_positive_far_in_the_tail():
    value = expected_min_exp(-500.0, 1.0)
    assert 0.0 < value < 1e-100


@pytest.mark.parametrize("mu", [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("sigma", [0.25, 1.0, 4.0])
def test_expected_min_exp_matches_monte_carlo(normals, mu, sigma):
    values = np.minimum(1.0, np.exp(mu + sigma * normals))
    stderr = np.std(values) / math.sqrt(values.size)
    # family-wise margin over the 21 cells
    assert abs(np.mean(values) - expected_min_exp(mu, sigma)) < 4 * stderr + 1e-12


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_expected_min_exp_rejects_bad_sigma(sigma):
    with pytest.raises(InvalidParameterError):
        expected_min_exp(0.0, sigma)


def test_rwmh_speed_at_classical_optimum():
    expected = 2.0 * 2.38 ** 2 * float(ndtr(-1.19))
    assert diffusion_speed_rwmh(2.38, 1.0) == pytest.approx(expected, rel=1e-12)
    assert diffusion_speed_rwmh(2.38, 1.0) == pytest.approx(1.3257, abs=1e-3)


def test_speeds_vanish_as_scale_shrinks():
    assert diffusion_speed_rwmh(1e-8, 1.0) < 1e-15
    assert diffusion_speed_atmcmc(1e-8, 1.0) < 1e-15


@pytest.mark.parametrize("l", [0.1, 0.5, 1.0, 2.4, 4.0, 7.5, 10.0])
def test_atmcmc_quadrature_matches_closed_form(l):
    assert diffusion_speed_atmcmc(l, 1.0) == pytest.approx(diffusion_speed_atmcmc_closed_form(l, 1.0), abs=1e-9)
    assert asymptotic_acceptance_atmcmc(l, 1.0) == pytest.approx(acceptance_atmcmc_closed_form(l, 1.0), abs=1e-9)


def test_atmcmc_speed_matches_monte_carlo(normals):
    l = 2.4
    a = l / 2.0
    values = 2.0 * l * l * normals ** 2 * ndtr(-a * np.abs(normals))
    stderr = np.std(values) / math.sqrt(values.size)
    assert abs(np.mean(values) - diffusion_speed_atmcmc(l, 1.0)) < 3 * stderr


def test_atmcmc_acceptance_matches_monte_carlo(normals):
    values = 2.0 * ndtr(-1.2 * np.abs(normals))
    stderr = np.std(values) / math.sqrt(values.size)
    assert abs(np.mean(values) - asymptotic_acceptance_atmcmc(2.4, 1.0)) < 3 * stderr


# 20 fixed (l, I) pairs drawn uniformly from [0.5, 8] x [0.25, 4]
_LI_GRID = RngStream(2718, 0).uniform(size=40).reshape(20, 2) * [7.5, 3.75] + [0.5, 0.25]


@pytest.mark.parametrize("l, I", [tuple(p) for p in _LI_GRID])
def test_atmcmc_quadrature_matches_monte_carlo_across_scales(normals, l, I):
    a = 0.5 * l * math.sqrt(I)
    tail = ndtr(-a * np.abs(normals))
    speed = 2.0 * l * l * normals ** 2 * tail
    accept = 2.0 * tail
    for values, exact in ((speed, diffusion_speed_atmcmc(l, I)), (accept, asymptotic_acceptance_atmcmc(l, I))):
        stderr = np.std(values) / math.sqrt(values.size)
        assert abs(np.mean(values) - exact) < 4 * stderr


def test_acceptance_values():
    assert asymptotic_acceptance_atmcmc(2.4, 1.0) == pytest.approx(0.4423, abs=1e-4)
    assert asymptotic_acceptance_rwmh(2.38, 1.0) == pytest.approx(0.234, abs=1e-3)
    assert asymptotic_acceptance_rwmh(4.0, 1.0) == pytest.approx(2.0 * float(ndtr(-2.0)), abs=1e-12)
    assert asymptotic_acceptance_atmcmc(1e-6, 1.0) == pytest.approx(1.0, abs=1e-6)


@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.1, max_value=10.0))
def test_acceptance_decreases_in_scale(l1, l2):
    assume(l2 - l1 > 1e-3)
    for kind in ("rwmh", "atmcmc"):
        high, low = asymptotic_acceptance(kind, l1, 1.0), asymptotic_acceptance(kind, l2, 1.0)
        assert 0.0 < low < high < 1.0


@given(st.floats(min_value=0.25, max_value=4.0), st.floats(min_value=0.25, max_value=4.0))
def test_acceptance_decreases_in_fisher_info(i1, i2):
    assume(i2 - i1 > 1e-3)
    assert asymptotic_acceptance_atmcmc(2.4, i1) > asymptotic_acceptance_atmcmc(2.4, i2)
    assert asymptotic_acceptance_rwmh(2.4, i1) > asymptotic_acceptance_rwmh(2.4, i2)


def test_optimal_rwmh_scale():
    result = optimize_scaling("rwmh", 1.0)
    assert round(result.l_opt, 1) == 2.4
    assert result.l_opt == pytest.approx(2.381, abs=5e-3)
    assert result.alpha_opt == pytest.approx(0.234, abs=2e-3)
    assert result.h_at_opt == pytest.approx(1.3257, abs=1e-3)


def test_optimal_atmcmc_scale():
    result = optimize_scaling("atmcmc", 1.0)
    assert 2.35 <= result.l_opt <= 2.5
    assert result.alpha_opt == pytest.approx(0.439, abs=5e-3)
    assert result.h_at_opt == pytest.approx(diffusion_speed_atmcmc_closed_form(result.l_opt, 1.0), abs=1e-9)


def test_atmcmc_is_slower_than_rwmh_at_the_optimum():
    at = optimize_scaling("atmcmc", 1.0)
    rw = optimize_scaling("rwmh", 1.0)
    assert at.h_at_opt < rw.h_at_opt


@pytest.mark.parametrize("kind", ["rwmh", "atmcmc"])
def test_optimum_depends_on_scale_times_root_information(kind):
    products = [optimize_scaling(kind, I).l_opt * math.sqrt(I) for I in (0.25, 1.0, 4.0)]
    assert max(products) - min(products) < 1e-4
    at_four = optimize_scaling(kind, 4.0)
    assert at_four.l_opt == pytest.approx(optimize_scaling(kind, 1.0).l_opt / 2.0, abs=1e-4)


def test_atmcmc_degrades_more_gracefully_away_from_the_optimum():
    at = optimize_scaling("atmcmc", 1.0)
    rw = optimize_scaling("rwmh", 1.0)
    for factor in (0.5, 2.0):
        rel_at = diffusion_speed_atmcmc(factor * at.l_opt, 1.0) / at.h_at_opt
        rel_rw = diffusion_speed_rwmh(factor * rw.l_opt, 1.0) / rw.h_at_opt
        assert rel_at > rel_rw


def test_finite_dimensional_rwmh_acceptance_in_two_dimensions():
    # R ~ chi_2 (Rayleigh) gives 2 E[Phi(-k R)] = 1 - k / sqrt(1 + k^2)
    k = 2.4 / (2.0 * math.sqrt(2.0))
    expected = 1.0 - k / math.sqrt(1.0 + k * k)
    assert finite_dim_acceptance_rwmh(2.4, 2, 1.0) == pytest.approx(expected, abs=1e-7)


def test_finite_dimensional_rwmh_acceptance_approaches_the_limit():
    assert finite_dim_acceptance_rwmh(2.4, 10_000, 1.0) == pytest.approx(asymptotic_acceptance_rwmh(2.4, 1.0), abs=1e-3)
    assert finite_dim_acceptance_rwmh(2.4, 200, 1.0) == pytest.approx(asymptotic_acceptance_rwmh(2.4, 1.0), abs=2e-3)


def test_quadrature_spec_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureSpec(abs_tol=1e-6)
    with pytest.raises(InvalidParameterError):
        QuadratureSpec(upper=3.0)
    assert QuadratureSpec().tail_bound() < 1e-10


def test_quadrature_error_reports_achieved_error():
    error = QuadratureError("integral did not converge", 3.2e-9)
    assert error.achieved_error == 3.2e-9
    assert "3.200e-09" in str(error)


def test_unsupported_kernel_has_no_diffusion_limit():
    with pytest.raises(UnsupportedError):
        diffusion_speed("atmcmc_scaled", 2.4, 1.0)
    with pytest.raises(UnsupportedError):
        asymptotic_acceptance("atmcmc_scaled", 2.4, 1.0)


def test_non_positive_information_is_rejected():
    with pytest.raises(InvalidParameterError):
        diffusion_speed_rwmh(2.4, 0.0)
    with pytest.raises(InvalidParameterError):
        optimize_scaling("atmcmc", -1.0)


def test_scaling_curves_peak_near_the_optima():
    curves = scaling_curves(1.0, n_points=200)
    assert curves.l.shape == curves.h_atmcmc.shape == curves.alpha_rwmh.shape == (200,)
    assert 2.3 <= curves.l[np.argmax(curves.h_rwmh)] <= 2.5
    assert 2.3 <= curves.l[np.argmax(curves.h_atmcmc)] <= 2.55
    assert np.all(np.diff(curves.alpha_atmcmc) < 0.0)
