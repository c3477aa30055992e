"""Experiment orchestration: configs, replications, ledgers, sweeps and fits."""

from .config import ExperimentConfig, load_config, parse_config
from .fit import fit_scaling_exponent
from .run import RegretLedger, run_experiment, run_replication
from .sweep import sweep

__all__ = ["ExperimentConfig", "load_config", "parse_config", "fit_scaling_exponent",
           "RegretLedger", "run_experiment", "run_replication", "sweep"]
