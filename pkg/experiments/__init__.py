"""
ATMCMC Lab Experiments Module

Config parsing, experiment orchestration and output writers.
"""

from .config import ExperimentConfig, default_config, load_config, parse_config
from .runner import run_experiment

__all__ = ['ExperimentConfig', 'default_config', 'load_config', 'parse_config', 'run_experiment']
