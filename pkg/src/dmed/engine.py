"""Synchronous DMED update over all agents.

In stacked form one step reads

    x(t+1) = (I - beta_t L(t)) x(t) - alpha_t K_t (x(t) - theta_bar(t))

with ``K_t = diag(k_n(t))`` the clipping gains. The consensus product
``L(t) x`` is evaluated edge-wise, never through a dense matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from dmed import metrics as _metrics
from dmed import schedule as _schedule
from dmed.observation import (
    AveragingWeightClamped,
    ObservationParams,
    ObservationStream,
    averaging_weight,
)
from dmed.schedule import ScheduleParams
from dmed.seeding import DROPOUT, OBSERVATION, SeedLike, as_seed_sequence, substream
from dmed.topology import GraphRealization, StaticGraph, laplacian_apply, sample_dropout_masks


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NetworkState:
    x: np.ndarray
    theta_bar: np.ndarray
    t: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        tb = np.asarray(self.theta_bar, dtype=float)
        if x.shape != tb.shape or x.ndim != 1:
            raise DimensionMismatchError(f"x shape {x.shape} vs theta_bar shape {tb.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "theta_bar", tb)

    @property
    def mean(self) -> float:
        return float(self.x.mean())


@dataclass(frozen=True, eq=False)
class ClipDiagnostics:
    k: np.ndarray
    num_clipped: int


def clip_gain(x_n: float, theta_bar_n: float, gamma_t: float) -> float:
    """1 when the innovation magnitude is within ``gamma_t``, else the factor
    that rescales it to exactly ``gamma_t``."""
    if not gamma_t > 0:
        raise ValueError(f"gamma_t must be positive, got {gamma_t}")
    gap = abs(x_n - theta_bar_n)
    return 1.0 if gap <= gamma_t else gamma_t / gap


def clip_gains(x: np.ndarray, theta_bar: np.ndarray, gamma_t: float) -> ClipDiagnostics:
    gap = np.abs(x - theta_bar)
    clipped = gap > gamma_t
    k = np.ones_like(gap)
    np.divide(gamma_t, gap, out=k, where=clipped)
    return ClipDiagnostics(k, int(clipped.sum()))


def _advance(x, theta_bar, active_edges, a, b, g):
    with np.errstate(invalid="ignore", over="ignore"):
        diag = clip_gains(x, theta_bar, g)
        x_next = x - b * laplacian_apply(active_edges, x) - a * diag.k * (x - theta_bar)
    if not np.all(np.isfinite(x_next)):
        raise FloatingPointError("non-finite estimate after update")
    return x_next, diag


def step(
    state: NetworkState,
    realization: GraphRealization,
    schedule: ScheduleParams,
    t: Optional[int] = None,
) -> NetworkState:
    """One synchronous update using only time-``t`` values of every agent.

    ``state.theta_bar`` must already hold the running averages at time ``t``.
    The returned state carries ``theta_bar`` unchanged; advancing it is the
    caller's job.
    """
    t = state.t if t is None else int(t)
    if realization.n_nodes != len(state.x):
        raise DimensionMismatchError(
            f"state has {len(state.x)} agents, realization has {realization.n_nodes} nodes"
        )
    x_next, _ = _advance(
        state.x, state.theta_bar, realization.active_index,
        _schedule.alpha(schedule, t), _schedule.beta(schedule, t), _schedule.gamma(schedule, t),
    )
    return NetworkState(x_next, state.theta_bar, t + 1)


@dataclass(frozen=True, eq=False)
class TrialSetup:
    """Everything a single trial needs besides its seed and horizon."""

    graph: StaticGraph
    p_drop: float
    observation: ObservationParams
    schedule: ScheduleParams
    x0: Union[float, np.ndarray] = 0.0
    record_every: int = 10
    eps1: Optional[float] = None

    def __post_init__(self):
        if self.graph.n_nodes != self.observation.n_agents:
            raise DimensionMismatchError(
                f"graph has {self.graph.n_nodes} nodes, observation model has "
                f"{self.observation.n_agents} agents"
            )
        if not 0.0 <= self.p_drop < 1.0:
            raise ValueError(f"p_drop must lie in [0, 1), got {self.p_drop}")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        violations = _schedule.validate(self.schedule)
        if violations:
            raise ValueError("inadmissible schedule: " + "; ".join(violations))

    def initial_x(self) -> np.ndarray:
        x0 = np.broadcast_to(np.asarray(self.x0, dtype=float), (self.graph.n_nodes,))
        return x0.copy()

    @property
    def resolved_eps1(self) -> float:
        if self.eps1 is not None:
            return float(self.eps1)
        return _metrics.default_eps1(self.schedule.tau1, self.schedule.tau2)


@dataclass(eq=False)
class Trajectory:
    """Recorded metrics as columns, one entry per recorded step."""

    t: np.ndarray
    columns: dict[str, np.ndarray]
    final: NetworkState = field(repr=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.t if name == "t" else self.columns[name]

    def at(self, t: int) -> _metrics.MetricsRecord:
        i = int(np.searchsorted(self.t, t))
        if i >= len(self.t) or self.t[i] != t:
            raise KeyError(f"step {t} was not recorded")
        return self.record(i)

    def record(self, i: int) -> _metrics.MetricsRecord:
        vals = {name: col[i].item() for name, col in self.columns.items()}
        vals["num_clipped"] = int(vals["num_clipped"])
        return _metrics.MetricsRecord(t=int(self.t[i]), **vals)

    def records(self) -> Iterator[_metrics.MetricsRecord]:
        for i in range(len(self.t)):
            yield self.record(i)


def run(setup: TrialSetup, t_max: int, seed: SeedLike, chunk: int = 1024) -> Trajectory:
    """Simulate one trial for ``t_max`` steps.

    Per step ``t``: draw observations ``theta(t)``; take
    ``theta_bar(0) = theta(0)`` at the first step; record metrics of
    ``x(t)`` when ``t`` is a multiple of ``record_every``; advance the running
    averages to ``t + 1``; sample the dropout realization; update ``x`` with
    ``theta_bar(t)``. Metrics for ``t_max`` are recorded after the last step.

    Agent ``n``'s noise comes from substream ``(OBSERVATION, n)`` of ``seed``
    and dropout masks from ``(DROPOUT,)``.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    sched, obs = setup.schedule, setup.observation
    n = obs.n_agents
    ss = as_seed_sequence(seed)
    stream = ObservationStream(obs, [substream(ss, OBSERVATION, i) for i in range(n)], chunk)
    drop_rng = substream(ss, DROPOUT)
    median = _metrics.median_set(obs.theta)
    eps1 = setup.resolved_eps1
    edges = setup.graph.edge_index

    if sched.c_mu > 1.0:
        warnings.warn(
            f"c_mu={sched.c_mu} > 1: averaging weight clamped to 1 while "
            f"c_mu/(t+1)**mu > 1", AveragingWeightClamped, stacklevel=2,
        )

    rows = []

    def record(t, x, theta_bar):
        diag = clip_gains(x, theta_bar, float(_schedule.gamma(sched, t)))
        rec = _metrics.measure(
            t, x, median, tau1=sched.tau1, tau2=sched.tau2, tau3=sched.tau3,
            eps1=eps1, num_clipped=diag.num_clipped,
        )
        rows.append(rec)

    x = setup.initial_x()
    theta_bar = None
    block_start, block_len = 0, 0
    for t in range(t_max):
        if t - block_start >= block_len:
            block_start = t
            ts = np.arange(t, t + chunk)
            masks = sample_dropout_masks(setup.graph, setup.p_drop, drop_rng, chunk)
            a_blk = _schedule.alpha(sched, ts).tolist()
            b_blk = _schedule.beta(sched, ts).tolist()
            g_blk = _schedule.gamma(sched, ts).tolist()
            rho_blk = np.minimum(1.0, averaging_weight(sched.c_mu, sched.mu, ts)).tolist()
            block_len = chunk
        s = t - block_start
        obs_t = stream.next()
        if t == 0:
            theta_bar = obs_t.copy()
        if t % setup.record_every == 0:
            record(t, x, theta_bar)
        rho = rho_blk[s]
        theta_bar_next = theta_bar + rho * (obs_t - theta_bar)
        x, _ = _advance(x, theta_bar, edges[masks[s]], a_blk[s], b_blk[s], g_blk[s])
        theta_bar = theta_bar_next
    if t_max % setup.record_every == 0:
        record(t_max, x, theta_bar)

    t_col = np.array([r.t for r in rows], dtype=np.int64)
    columns = {
        name: np.array([getattr(r, name) for r in rows],
                       dtype=np.int64 if name == "num_clipped" else float)
        for name in _metrics.METRIC_FIELDS
    }
    return Trajectory(t_col, columns, NetworkState(x, theta_bar, t_max))
