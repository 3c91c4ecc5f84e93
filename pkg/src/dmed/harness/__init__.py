from .config import ExperimentConfig, GraphSource, load_config, parse_config, reference_config, serialize_config
from .experiment import AggregateSeries, aggregate, emit_csv, read_csv, run_experiment, run_trials

__all__ = [
    "AggregateSeries", "ExperimentConfig", "GraphSource", "aggregate", "emit_csv", "load_config",
    "parse_config", "read_csv", "reference_config", "run_experiment", "run_trials", "serialize_config",
]
