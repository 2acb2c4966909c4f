"""
Experiment runners.
"""

from .experiment import ExperimentRunner, run_intersection_experiment, run_norm_experiment
from .suite import SuiteRunner, load_failures, load_results

__all__ = [
    "ExperimentRunner",
    "SuiteRunner",
    "load_failures",
    "load_results",
    "run_intersection_experiment",
    "run_norm_experiment",
]
