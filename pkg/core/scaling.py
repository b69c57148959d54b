"""
Scaling - Diffusion Limits and Optimal Scale

Closed form of E[min{1, e^X}] for Gaussian X, diffusion speeds of the
limiting Langevin diffusions for RWMH and additive TMCMC on iid products,
the optimal scale maximizing them and the matching asymptotic acceptance
rates. Every quantity depends on (l, I) only through l * sqrt(I).

ATMCMC integrals carry the standard normal weight phi(z) dz:

    h_ATMCMC(l) = 4 l^2 int_0^inf z^2 Phi(-z l sqrt(I) / 2) phi(z) dz
    alpha(l)    = 4     int_0^inf     Phi(-z l sqrt(I) / 2) phi(z) dz
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import ndtr

from .errors import InvalidParameterError, QuadratureError, UnsupportedError

L_MIN = 0.1
L_MAX = 10.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive quadrature on the truncated domain [0, upper]."""

    upper: float = 8.0
    abs_tol: float = 1e-10
    limit: int = 200

    def __post_init__(self):
        if not self.abs_tol <= 1e-8 or self.abs_tol <= 0.0:
            raise InvalidParameterError(f"abs_tol must lie in (0, 1e-8], got {self.abs_tol}")
        if self.tail_bound() >= self.abs_tol:
            raise InvalidParameterError(
                f"truncation at {self.upper} leaves a tail of {self.tail_bound():.2e} >= abs_tol"
            )

    def tail_bound(self) -> float:
        """Bound on 4 * int_B^inf (1 + z^2) phi(z) dz, which dominates both integrands."""
        b = self.upper
        phi_b = math.exp(-0.5 * b * b) / _SQRT_2PI
        return 4.0 * (2.0 * float(ndtr(-b)) + b * phi_b)


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class ScalingResult:
    """Optimal scale of one chain kind at a given Fisher information."""

    kind: str
    fisher_info: float
    l_opt: float
    h_at_opt: float
    alpha_opt: float

    def describe(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "fisher_info": self.fisher_info,
            "l_opt": self.l_opt,
            "l_opt_sqrt_I": self.l_opt * math.sqrt(self.fisher_info),
            "h_at_opt": self.h_at_opt,
            "alpha_opt": self.alpha_opt,
        }


@dataclass(frozen=True)
class ScalingCurves:
    """Diffusion speeds and acceptance rates on a grid of l."""

    fisher_info: float
    l: np.ndarray
    h_rwmh: np.ndarray
    h_atmcmc: np.ndarray
    alpha_rwmh: np.ndarray
    alpha_atmcmc: np.ndarray


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")
    return value


def _quad(func: Callable[[float], float], quad: QuadratureSpec, what: str) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(func, 0.0, quad.upper, epsabs=quad.abs_tol,
                                        epsrel=0.0, limit=quad.limit)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"{what}: {exc}", math.nan) from exc
    if err > quad.abs_tol:
        raise QuadratureError(f"{what} did not converge", err)
    return value


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def expected_min_exp(mu: float, sigma: float) -> float:
    """E[min{1, e^X}] for X ~ N(mu, sigma^2), clamped to (0, 1]."""
    sigma = _positive("sigma", sigma)
    mu = float(mu)
    if not math.isfinite(mu):
        raise InvalidParameterError(f"mu must be finite, got {mu}")
    # e^{mu + sigma^2/2} Phi(-sigma - mu/sigma) in log space to avoid overflow
    tail = float(ndtr(-sigma - mu / sigma))
    second = math.exp(mu + 0.5 * sigma * sigma + math.log(tail)) if tail > 0.0 else 0.0
    value = float(ndtr(mu / sigma)) + second
    return min(1.0, max(value, math.ulp(0.0)))


def diffusion_speed_rwmh(l: float, I: float) -> float:
    """h_RWMH(l) = 2 l^2 Phi(-l sqrt(I) / 2)."""
    l = _positive("l", l)
    I = _positive("I", I)
    return 2.0 * l * l * float(ndtr(-0.5 * l * math.sqrt(I)))


def diffusion_speed_atmcmc(l: float, I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """h_ATMCMC(l) by adaptive quadrature."""
    l = _positive("l", l)
    a = 0.5 * l * math.sqrt(_positive("I", I))
    integral = _quad(lambda z: z * z * float(ndtr(-a * z)) * _phi(z), quad, "diffusion speed integral")
    return 4.0 * l * l * integral


def asymptotic_acceptance_atmcmc(l: float, I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """alpha(l) = 4 int_0^inf Phi(-|u| l sqrt(I) / 2) phi(u) du by quadrature."""
    a = 0.5 * _positive("l", l) * math.sqrt(_positive("I", I))
    integral = _quad(lambda u: float(ndtr(-a * u)) * _phi(u), quad, "acceptance integral")
    return min(1.0, 4.0 * integral)


def asymptotic_acceptance_rwmh(l: float, I: float) -> float:
    """2 Phi(-l sqrt(I) / 2)."""
    l = _positive("l", l)
    I = _positive("I", I)
    return 2.0 * float(ndtr(-0.5 * l * math.sqrt(I)))


def acceptance_atmcmc_closed_form(l: float, I: float) -> float:
    """1 - (2/pi) arctan(a), a = l sqrt(I) / 2 (bivariate orthant probability).

    For Gaussian products this is also the exact stationary acceptance rate
    in every dimension d, not only in the limit.
    """
    a = 0.5 * _positive("l", l) * math.sqrt(_positive("I", I))
    return 1.0 - 2.0 * math.atan(a) / math.pi


def diffusion_speed_atmcmc_closed_form(l: float, I: float) -> float:
    """h_ATMCMC(l) = 4 l^2 [1/4 - arctan(a)/(2 pi) - a / (2 pi (1 + a^2))]."""
    l = _positive("l", l)
    a = 0.5 * l * math.sqrt(_positive("I", I))
    inner = 0.25 - math.atan(a) / (2.0 * math.pi) - a / (2.0 * math.pi * (1.0 + a * a))
    return 4.0 * l * l * inner


def finite_dim_acceptance_rwmh(l: float, d: int, I: float) -> float:
    """Exact stationary RWMH acceptance on a d-dimensional Gaussian product.

    alpha = 2 E[Phi(-(l sqrt(I) / (2 sqrt(d))) R)], R ~ chi_d.
    """
    l = _positive("l", l)
    I = _positive("I", I)
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    k = 0.5 * l * math.sqrt(I) / math.sqrt(d)
    radius = stats.chi(d)
    # chi_d concentrates near sqrt(d) for large d; integrate over its bulk only
    lo, hi = float(radius.ppf(1e-15)), float(radius.isf(1e-15))
    return 2.0 * float(radius.expect(lambda r: ndtr(-k * r), lb=lo, ub=hi))


def diffusion_speed(kind: str, l: float, I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    if kind == "rwmh":
        return diffusion_speed_rwmh(l, I)
    if kind == "atmcmc":
        return diffusion_speed_atmcmc(l, I, quad)
    raise UnsupportedError(f"no diffusion limit for kernel '{kind}'")


def asymptotic_acceptance(kind: str, l: float, I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    if kind == "rwmh":
        return asymptotic_acceptance_rwmh(l, I)
    if kind == "atmcmc":
        return asymptotic_acceptance_atmcmc(l, I, quad)
    raise UnsupportedError(f"no asymptotic acceptance rate for kernel '{kind}'")


def optimize_scaling(kind: str, I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE,
                     xatol: float = 1e-6) -> ScalingResult:
    """Maximize h over l in [0.1, 10] (bounded golden-section/Brent search)."""
    I = _positive("I", I)
    objective = lambda l: -diffusion_speed(kind, l, I, quad)
    result = optimize.minimize_scalar(objective, bounds=(L_MIN, L_MAX), method="bounded",
                                      options={"xatol": xatol})
    l_opt = float(result.x)
    h_opt = -float(result.fun)
    edges = max(-objective(L_MIN), -objective(L_MAX))
    if not result.success or h_opt <= edges:
        raise InvalidParameterError(f"diffusion speed of {kind} has no interior maximum on [{L_MIN}, {L_MAX}]")
    return ScalingResult(kind=kind, fisher_info=I, l_opt=l_opt, h_at_opt=h_opt,
                         alpha_opt=asymptotic_acceptance(kind, l_opt, I, quad))


def scaling_curves(I: float, quad: QuadratureSpec = DEFAULT_QUADRATURE, n_points: int = 200,
                   l_min: float = L_MIN, l_max: float = L_MAX) -> ScalingCurves:
    """Both diffusion speeds and acceptance rates on a uniform l grid."""
    I = _positive("I", I)
    if n_points < 2 or not 0.0 < l_min < l_max:
        raise InvalidParameterError(f"need n_points >= 2 and 0 < l_min < l_max, got {n_points}, {l_min}, {l_max}")
    grid = np.linspace(l_min, l_max, n_points)
    return ScalingCurves(
        fisher_info=I,
        l=grid,
        h_rwmh=np.array([diffusion_speed_rwmh(l, I) for l in grid]),
        h_atmcmc=np.array([diffusion_speed_atmcmc(l, I, quad) for l in grid]),
        alpha_rwmh=np.array([asymptotic_acceptance_rwmh(l, I) for l in grid]),
        alpha_atmcmc=np.array([asymptotic_acceptance_atmcmc(l, I, quad) for l in grid]),
    )
