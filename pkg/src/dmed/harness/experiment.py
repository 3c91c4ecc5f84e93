"""Monte-Carlo trials, order-independent aggregation and CSV output."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from dmed import engine
from dmed.metrics import METRIC_FIELDS
from dmed.seeding import trial_seed

from .config import ExperimentConfig

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t", "rms_dist_mean", "rms_dist_std", "mean_dist_mean", "consensus_err_mean",
    "scaled_dist_mean", "scaled_consensus_mean", "num_clipped_mean", "n_trials",
)


class TrialError(RuntimeError):
    pass


@dataclass(eq=False)
class AggregateSeries:
    """Per recorded step: trial mean and sample standard deviation of every metric."""

    t: np.ndarray
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    n_trials: int

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def empty(cls) -> "AggregateSeries":
        z = np.zeros(0)
        return cls(np.zeros(0, dtype=np.int64), {k: z for k in METRIC_FIELDS},
                   {k: z for k in METRIC_FIELDS}, 0)


def _fsum_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sample std along axis 0 via exactly rounded sums, so the
    result does not depend on the order of the trials."""
    n = values.shape[0]
    cols = values.T
    mean = np.array([math.fsum(c) / n for c in cols])
    if n < 2:
        return mean, np.zeros_like(mean)
    var = np.array([math.fsum((c - m) ** 2) / (n - 1) for c, m in zip(cols, mean)])
    return mean, np.sqrt(var)


def aggregate(trajectories: Sequence[engine.Trajectory]) -> AggregateSeries:
    if not trajectories:
        raise ValueError("nothing to aggregate")
    t = trajectories[0].t
    for tr in trajectories[1:]:
        if not np.array_equal(tr.t, t):
            raise ValueError("trajectories recorded at different steps")
    mean, std = {}, {}
    for name in METRIC_FIELDS:
        stacked = np.stack([np.asarray(tr.columns[name], dtype=float) for tr in trajectories])
        mean[name], std[name] = _fsum_stats(stacked)
    return AggregateSeries(t.copy(), mean, std, len(trajectories))


def _one_trial(args):
    setup, t_max, base_seed, i = args
    try:
        return engine.run(setup, t_max, trial_seed(base_seed, i))
    except Exception as exc:
        raise TrialError(f"trial {i} (base_seed={base_seed}): {exc}") from exc


def run_trials(
    setup: engine.TrialSetup,
    t_max: int,
    n_trials: int,
    base_seed: int,
    workers: int = 1,
) -> list[engine.Trajectory]:
    """Trial ``i`` is :func:`engine.run` seeded with ``trial_seed(base_seed, i)``.

    With ``workers > 1`` trials run in a process pool; the returned list is
    always in trial order.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    jobs = [(setup, t_max, base_seed, i) for i in range(n_trials)]
    if workers <= 1:
        out = []
        for job in jobs:
            out.append(_one_trial(job))
            log.debug("trial %d/%d done", job[3] + 1, n_trials)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_trial, jobs))


def run_experiment(
    config: ExperimentConfig,
    *,
    graph=None,
    workers: int = 1,
) -> AggregateSeries:
    setup = config.setup(graph)
    log.info("graph: %d nodes, %d edges; p_drop=%g; %d trials x %d steps",
             setup.graph.n_nodes, setup.graph.n_edges, config.p_drop,
             config.n_trials, config.t_max)
    trajs = run_trials(setup, config.t_max, config.n_trials, config.base_seed, workers)
    return aggregate(trajs)


def _num(v) -> str:
    return format(float(v), ".16e")


def emit_csv(series: AggregateSeries, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            m, s = series.mean, series.std
            for i, t in enumerate(series.t):
                w.writerow([
                    int(t), _num(m["rms_dist"][i]), _num(s["rms_dist"][i]),
                    _num(m["mean_dist"][i]), _num(m["consensus_err"][i]),
                    _num(m["scaled_dist"][i]), _num(m["scaled_consensus"][i]),
                    _num(m["num_clipped"][i]), series.n_trials,
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path: Union[str, Path]) -> AggregateSeries:
    """Inverse of :func:`emit_csv`. Std columns the file does not carry are NaN."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header {rows[0] if rows else None}")
    body = rows[1:]
    if not body:
        return AggregateSeries.empty()
    cols = {name: [r[k] for r in body] for k, name in enumerate(CSV_COLUMNS)}
    f = lambda name: np.array([float(v) for v in cols[name]])
    nan = np.full(len(body), np.nan)
    mean = {
        "rms_dist": f("rms_dist_mean"), "mean_dist": f("mean_dist_mean"),
        "consensus_err": f("consensus_err_mean"), "scaled_dist": f("scaled_dist_mean"),
        "scaled_consensus": f("scaled_consensus_mean"), "num_clipped": f("num_clipped_mean"),
    }
    std = {name: nan.copy() for name in METRIC_FIELDS}
    std["rms_dist"] = f("rms_dist_std")
    return AggregateSeries(np.array([int(v) for v in cols["t"]], dtype=np.int64),
                           mean, std, int(cols["n_trials"][0]))
