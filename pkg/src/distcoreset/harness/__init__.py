from .config import ExperimentConfig, load_config, parse_sweep
from .data import gen_synthetic, load_dataset, save_dataset
from .experiment import ResultRow, aggregate_results, evaluate, run_experiment

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "aggregate_results",
    "evaluate",
    "gen_synthetic",
    "load_config",
    "load_dataset",
    "parse_sweep",
    "run_experiment",
    "save_dataset",
]
