"""
ATMCMC Lab Core Module

Samplers, targets, scaling calculus and diagnostics for additive
transformation MCMC and its random-walk Metropolis-Hastings baseline.
"""

__version__ = "1.0.0"
__author__ = "GitMVP"

from .errors import (
    ConfigError,
    InvalidParameterError,
    InvalidSpecError,
    QuadratureError,
    SamplerError,
    UnsupportedError,
)
from .rng_core import (
    RNG_ALGORITHM,
    DrawCounts,
    RngStream,
    draw_half_normal,
    draw_signs,
    draw_std_normal_vec,
    spawn_streams,
)
from .targets import GaussianComponent, TargetModel, fisher_info, log_pi, make_target
from .samplers import (
    ChainRun,
    ProposalSpec,
    StepOutcome,
    accept_prob,
    atmcmc_scaled_step,
    atmcmc_step,
    run_chain,
    rwmh_step,
)
from .scaling import (
    QuadratureSpec,
    ScalingResult,
    acceptance_atmcmc_closed_form,
    asymptotic_acceptance_atmcmc,
    asymptotic_acceptance_rwmh,
    diffusion_speed_atmcmc,
    diffusion_speed_atmcmc_closed_form,
    diffusion_speed_rwmh,
    expected_min_exp,
    finite_dim_acceptance_rwmh,
    optimize_scaling,
    scaling_curves,
)
from .diagnostics import (
    DriftEstimate,
    KsSeries,
    acceptance_rate,
    burn_in_summary,
    draw_count_report,
    drift_ratio,
    ks_experiment,
    ks_statistic,
    regularity_moments,
    run_ensemble,
    tail_slope,
)

__all__ = [
    'ConfigError',
    'InvalidParameterError',
    'InvalidSpecError',
    'QuadratureError',
    'SamplerError',
    'UnsupportedError',
    'RNG_ALGORITHM',
    'DrawCounts',
    'RngStream',
    'draw_half_normal',
    'draw_signs',
    'draw_std_normal_vec',
    'spawn_streams',
    'GaussianComponent',
    'TargetModel',
    'fisher_info',
    'log_pi',
    'make_target',
    'ChainRun',
    'ProposalSpec',
    'StepOutcome',
    'accept_prob',
    'atmcmc_scaled_step',
    'atmcmc_step',
    'run_chain',
    'rwmh_step',
    'QuadratureSpec',
    'ScalingResult',
    'acceptance_atmcmc_closed_form',
    'asymptotic_acceptance_atmcmc',
    'asymptotic_acceptance_rwmh',
    'diffusion_speed_atmcmc',
    'diffusion_speed_atmcmc_closed_form',
    'diffusion_speed_rwmh',
    'expected_min_exp',
    'finite_dim_acceptance_rwmh',
    'optimize_scaling',
    'scaling_curves',
    'DriftEstimate',
    'KsSeries',
    'acceptance_rate',
    'burn_in_summary',
    'draw_count_report',
    'drift_ratio',
    'ks_experiment',
    'ks_statistic',
    'regularity_moments',
    'run_ensemble',
    'tail_slope',
]
