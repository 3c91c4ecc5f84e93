"""Experiment configuration stored as an INI file.

Sections mirror the parameter types::

    [graph]        source = rgg | file, plus nodes/target_lambda2/tolerance/seed or path
    [network]      p_drop
    [observation]  theta (comma list), v0, delta, noise_sigma, bias, noise
    [schedule]     alpha0, tau1, beta0, tau2, gamma0, tau3, c_mu, mu, eps_bar
    [run]          x0, t_max, n_trials, base_seed, record_every, eps1 (optional)

The bias decay exponent is given once, under ``[observation]``, and shared
with the schedule.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from dmed import schedule as _schedule
from dmed.engine import TrialSetup
from dmed.observation import BiasKind, ObservationParams, gaussian_noise, laplace_noise
from dmed.schedule import ScheduleParams
from dmed.seeding import GRAPH, substream
from dmed.topology import StaticGraph, generate_for_lambda2, read_edgelist

NOISE_KINDS = {"gaussian": gaussian_noise, "laplace": laplace_noise}
_NOISE_NAMES = {fn: name for name, fn in NOISE_KINDS.items()}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GraphSource:
    source: str
    nodes: Optional[int] = None
    target_lambda2: Optional[float] = None
    tolerance: float = 0.5
    seed: int = 0
    path: Optional[str] = None

    def __post_init__(self):
        if self.source == "rgg":
            if self.nodes is None or self.target_lambda2 is None:
                raise ConfigError("[graph] source = rgg needs nodes and target_lambda2")
        elif self.source == "file":
            if not self.path:
                raise ConfigError("[graph] source = file needs path")
        else:
            raise ConfigError(f"[graph] source must be 'rgg' or 'file', got {self.source!r}")

    def resolve(self) -> StaticGraph:
        if self.source == "file":
            return read_edgelist(self.path)
        g, _ = generate_for_lambda2(
            self.nodes, self.target_lambda2, substream(self.seed, GRAPH), self.tolerance
        )
        return g


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    graph: GraphSource
    p_drop: float
    observation: ObservationParams
    schedule: ScheduleParams
    x0: Union[float, tuple] = 0.0
    t_max: int = 10_000
    n_trials: int = 100
    base_seed: int = 0
    record_every: int = 10
    eps1: Optional[float] = None

    def problems(self) -> list[str]:
        out = list(_schedule.validate(self.schedule))
        if self.n_trials < 1:
            out.append(f"n_trials >= 1 fails (n_trials={self.n_trials})")
        if self.t_max < 1:
            out.append(f"t_max >= 1 fails (t_max={self.t_max})")
        if self.record_every < 1:
            out.append(f"record_every >= 1 fails (record_every={self.record_every})")
        if not 0.0 <= self.p_drop < 1.0:
            out.append(f"0 <= p_drop < 1 fails (p_drop={self.p_drop})")
        if self.base_seed < 0:
            out.append(f"base_seed >= 0 fails (base_seed={self.base_seed})")
        if self.graph.source == "rgg" and self.graph.nodes != self.observation.n_agents:
            out.append(
                f"graph nodes ({self.graph.nodes}) must equal number of theta values "
                f"({self.observation.n_agents})"
            )
        if not isinstance(self.x0, float) and len(self.x0) != self.observation.n_agents:
            out.append(f"x0 has {len(self.x0)} entries for {self.observation.n_agents} agents")
        return out

    def setup(self, graph: Optional[StaticGraph] = None) -> TrialSetup:
        """Resolve the graph (unless given) and build the per-trial setup."""
        problems = self.problems()
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))
        g = self.graph.resolve() if graph is None else graph
        x0 = self.x0 if isinstance(self.x0, float) else np.array(self.x0)
        return TrialSetup(g, self.p_drop, self.observation, self.schedule, x0,
                          self.record_every, self.eps1)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace("\n", ",").split(",") if v.strip())


def _fmt(v: float) -> str:
    return repr(float(v))


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
        g = cp["graph"]
        source = g.get("source", "rgg").strip()
        graph = GraphSource(
            source=source,
            nodes=g.getint("nodes") if "nodes" in g else None,
            target_lambda2=g.getfloat("target_lambda2") if "target_lambda2" in g else None,
            tolerance=g.getfloat("tolerance", 0.5),
            seed=g.getint("seed", 0),
            path=g.get("path"),
        )
        o = cp["observation"]
        noise_name = o.get("noise", "gaussian").strip()
        if noise_name not in NOISE_KINDS:
            raise ConfigError(f"[observation] noise must be one of {sorted(NOISE_KINDS)}")
        bias = BiasKind(o.get("bias", BiasKind.DETERMINISTIC_POWER_LAW.value).strip())
        if bias is not BiasKind.DETERMINISTIC_POWER_LAW:
            raise ConfigError("config files support only bias = deterministic_power_law")
        obs = ObservationParams(
            theta=np.array(_floats(o["theta"])),
            v0=o.getfloat("v0", 0.0),
            delta=o.getfloat("delta", 1.0),
            noise_sigma=o.getfloat("noise_sigma", 0.0),
            bias_kind=bias,
            noise=NOISE_KINDS[noise_name],
        )
        s = cp["schedule"]
        sched = ScheduleParams(
            alpha0=s.getfloat("alpha0"), tau1=s.getfloat("tau1"),
            beta0=s.getfloat("beta0"), tau2=s.getfloat("tau2"),
            gamma0=s.getfloat("gamma0"), tau3=s.getfloat("tau3"),
            c_mu=s.getfloat("c_mu"), mu=s.getfloat("mu"),
            delta=obs.delta, eps_bar=s.getfloat("eps_bar", 0.1),
        )
        if any(v is None for v in (sched.alpha0, sched.tau1, sched.beta0, sched.tau2,
                                   sched.gamma0, sched.tau3, sched.c_mu, sched.mu)):
            raise ConfigError("[schedule] needs alpha0, tau1, beta0, tau2, gamma0, tau3, c_mu, mu")
        r = cp["run"] if cp.has_section("run") else {}
        x0_vals = _floats(r.get("x0", "0"))
        n_section = cp["network"] if cp.has_section("network") else {}
        return ExperimentConfig(
            graph=graph,
            p_drop=float(n_section.get("p_drop", "0")),
            observation=obs,
            schedule=sched,
            x0=x0_vals[0] if len(x0_vals) == 1 else x0_vals,
            t_max=int(r.get("t_max", "10000")),
            n_trials=int(r.get("n_trials", "100")),
            base_seed=int(r.get("base_seed", "0")),
            record_every=int(r.get("record_every", "10")),
            eps1=float(r["eps1"]) if "eps1" in r else None,
        )
    except ConfigError:
        raise
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a config file; a relative edge-list path is taken relative to it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text)
    if cfg.graph.source == "file" and not Path(cfg.graph.path).is_absolute():
        resolved = str((path.parent / cfg.graph.path).resolve())
        cfg = ExperimentConfig(**{**cfg.__dict__, "graph": GraphSource(**{**cfg.graph.__dict__, "path": resolved})})
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    g = cfg.graph
    graph = {"source": g.source}
    if g.source == "rgg":
        graph.update(nodes=str(g.nodes), target_lambda2=_fmt(g.target_lambda2),
                     tolerance=_fmt(g.tolerance), seed=str(g.seed))
    else:
        graph["path"] = g.path
    cp["graph"] = graph
    cp["network"] = {"p_drop": _fmt(cfg.p_drop)}
    o = cfg.observation
    cp["observation"] = {
        "theta": ", ".join(_fmt(v) for v in o.theta),
        "v0": _fmt(o.v0),
        "delta": _fmt(o.delta),
        "noise_sigma": _fmt(o.noise_sigma),
        "bias": o.bias_kind.value,
        "noise": _NOISE_NAMES.get(o.noise, "gaussian"),
    }
    s = cfg.schedule
    cp["schedule"] = {k: _fmt(getattr(s, k)) for k in
                      ("alpha0", "tau1", "beta0", "tau2", "gamma0", "tau3", "c_mu", "mu", "eps_bar")}
    run = {
        "x0": _fmt(cfg.x0) if isinstance(cfg.x0, float) else ", ".join(_fmt(v) for v in cfg.x0),
        "t_max": str(cfg.t_max),
        "n_trials": str(cfg.n_trials),
        "base_seed": str(cfg.base_seed),
        "record_every": str(cfg.record_every),
    }
    if cfg.eps1 is not None:
        run["eps1"] = _fmt(cfg.eps1)
    cp["run"] = run
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def reference_config(target_lambda2: float = 1.8, p_drop: float = 0.1, *, graph_seed: int = 0,
                     n_trials: int = 100, t_max: int = 10_000, base_seed: int = 0) -> ExperimentConfig:
    """The 40-agent setting: theta_n = n, bias 10/(t+1), N(0, 4) noise."""
    return ExperimentConfig(
        graph=GraphSource("rgg", nodes=40, target_lambda2=target_lambda2, seed=graph_seed),
        p_drop=p_drop,
        observation=ObservationParams(theta=np.arange(1.0, 41.0), v0=10.0, delta=1.0, noise_sigma=2.0),
        schedule=_schedule.default_schedule(),
        x0=0.0,
        t_max=t_max,
        n_trials=n_trials,
        base_seed=base_seed,
        record_every=10,
    )
