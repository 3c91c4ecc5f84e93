"""Distributed median estimation with clipped consensus+innovations updates."""

from dmed.engine import NetworkState, TrialSetup, Trajectory, clip_gain, clip_gains, run, step
from dmed.metrics import MedianSet, MetricsRecord, consensus_error, d_min, dist_to_set, median_set
from dmed.observation import (
    BiasKind,
    LocalAverageState,
    ObservationParams,
    ObservationStream,
    lemma1_recursion,
    observe,
    update_local_average,
)
from dmed.schedule import ScheduleParams, default_schedule, validate
from dmed.topology import (
    GraphRealization,
    StaticGraph,
    build_laplacian,
    generate_for_lambda2,
    generate_random_geometric,
    lambda2,
    sample_dropout,
)

__version__ = "0.1.0"

__all__ = [
    "BiasKind", "GraphRealization", "LocalAverageState", "MedianSet", "MetricsRecord",
    "NetworkState", "ObservationParams", "ObservationStream", "ScheduleParams", "StaticGraph",
    "Trajectory", "TrialSetup", "build_laplacian", "clip_gain", "clip_gains", "consensus_error",
    "d_min", "default_schedule", "dist_to_set", "generate_for_lambda2", "generate_random_geometric",
    "lambda2", "lemma1_recursion", "median_set", "observe", "run", "sample_dropout", "step",
    "update_local_average", "validate",
]
