"""Experiment drivers, reports and the command-line interface."""
from .config import DEFAULT_SEED, DEFAULT_M_LIST, ExperimentConfig
from .experiments import (noise_direction, run, run_cheb_demo, run_counterexample, run_noisy_experiment,
                          run_rate_experiment, run_regularization_comparison, run_single_recover)
from .reports import (ChebDemoReport, CompareReport, CounterexampleReport, NoisyReport, RateReport, RateRow,
                      RecoverReport, loglog_slope)

__all__ = [
    "DEFAULT_SEED", "DEFAULT_M_LIST", "ExperimentConfig", "noise_direction", "run", "run_cheb_demo",
    "run_counterexample", "run_noisy_experiment", "run_rate_experiment", "run_regularization_comparison",
    "run_single_recover", "ChebDemoReport", "CompareReport", "CounterexampleReport", "NoisyReport",
    "RateReport", "RateRow", "RecoverReport", "loglog_slope",
]
