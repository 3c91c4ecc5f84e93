"""Noisy, biased local observations and their recursive running average.

Agent ``n`` observes ``theta_n(t) = theta_n + w_n(t) + nu_n(t)`` where
``w_n(t)`` is zero-mean white noise and the bias obeys
``|nu_n(t)| <= v0 * (t+1)**-delta``. Each agent smooths its stream with

    theta_bar(t+1) = (1 - rho_t) theta_bar(t) + rho_t theta(t),
    rho_t = min(1, c_mu / (t+1)**mu).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

# Absolute slack when checking user-supplied bias against its envelope.
_BIAS_SLACK = 1e-12

NoiseSampler = Callable[[np.random.Generator, int], np.ndarray]
BiasFunction = Callable[[int, np.ndarray], np.ndarray]


class AveragingWeightClamped(UserWarning):
    """``c_mu / (t+1)**mu`` exceeded 1 and was clamped to 1."""


class BiasBoundError(ValueError):
    pass


class BiasKind(enum.Enum):
    DETERMINISTIC_POWER_LAW = "deterministic_power_law"
    CUSTOM_BOUNDED = "custom_bounded"


def gaussian_noise(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size)


def laplace_noise(rng: np.random.Generator, size: int) -> np.ndarray:
    """Unit-variance Laplace draws."""
    return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)


@dataclass(frozen=True, eq=False)
class ObservationParams:
    """Observation model for all agents.

    ``noise`` returns zero-mean, unit-variance draws that are scaled by
    ``noise_sigma``. For ``BiasKind.CUSTOM_BOUNDED``, ``bias_fn(n, t)`` gives
    the bias of agent ``n`` at the steps in array ``t``; every value is checked
    against ``v0 * (t+1)**-delta``.
    """

    theta: np.ndarray
    v0: float = 0.0
    delta: float = 1.0
    noise_sigma: float = 0.0
    bias_kind: BiasKind = BiasKind.DETERMINISTIC_POWER_LAW
    bias_fn: Optional[BiasFunction] = None
    noise: NoiseSampler = field(default=gaussian_noise)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        object.__setattr__(self, "theta", theta)
        if len(np.unique(theta)) != len(theta):
            raise ValueError("local values theta must be pairwise distinct")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.noise_sigma >= 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        if not self.v0 >= 0:
            raise ValueError(f"v0 must be nonnegative, got {self.v0}")
        kind = BiasKind(self.bias_kind)
        object.__setattr__(self, "bias_kind", kind)
        if kind is BiasKind.CUSTOM_BOUNDED and self.bias_fn is None:
            raise ValueError("custom_bounded bias requires bias_fn")

    @property
    def n_agents(self) -> int:
        return len(self.theta)

    def bias_bound(self, t):
        return self.v0 * np.power(np.add(t, 1.0), -self.delta)

    def bias(self, n: int, t) -> np.ndarray:
        """Bias of agent ``n`` at step(s) ``t``, validated against the envelope."""
        t = np.asarray(t)
        bound = self.bias_bound(t)
        if self.bias_kind is BiasKind.DETERMINISTIC_POWER_LAW:
            return bound
        nu = np.asarray(self.bias_fn(n, t), dtype=float)
        if np.any(~(np.abs(nu) <= bound + _BIAS_SLACK)):
            bad = np.flatnonzero(~(np.abs(nu) <= bound + _BIAS_SLACK).reshape(-1))[0]
            raise BiasBoundError(
                f"agent {n}: bias {nu.reshape(-1)[bad]!r} at t={t.reshape(-1)[bad]} "
                f"exceeds bound {np.broadcast_to(bound, nu.shape).reshape(-1)[bad]!r}"
            )
        return nu


def observe(params: ObservationParams, n: int, t: int, rng: np.random.Generator) -> float:
    """One observation of agent ``n`` at step ``t``.

    Consumes exactly one noise draw from ``rng`` even when ``noise_sigma`` is 0,
    so streams stay aligned across noise levels.
    """
    if not 0 <= n < params.n_agents:
        raise IndexError(f"agent {n} out of range for {params.n_agents} agents")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    w = params.noise_sigma * float(params.noise(rng, 1)[0])
    nu = float(params.bias(n, np.array([t]))[0])
    return float(params.theta[n]) + w + nu


class ObservationStream:
    """Sequential observation vectors for all agents, one per step.

    Agent ``n`` draws from its own generator ``rngs[n]``, so the value for
    ``(n, t)`` is the ``t``-th draw of that generator regardless of the order
    agents are evaluated in. Noise is drawn in blocks of ``chunk`` steps; the
    result equals calling :func:`observe` for ``t = 0, 1, ...`` on each
    agent's generator.
    """

    def __init__(self, params: ObservationParams, rngs: Sequence[np.random.Generator], chunk: int = 1024):
        if len(rngs) != params.n_agents:
            raise ValueError(f"need {params.n_agents} generators, got {len(rngs)}")
        self.params = params
        self._rngs = list(rngs)
        self._chunk = int(chunk)
        self._block = np.empty((0, params.n_agents))
        self._start = 0
        self.t = 0

    def _refill(self):
        p = self.params
        ts = np.arange(self.t, self.t + self._chunk)
        block = np.empty((self._chunk, p.n_agents))
        for n, rng in enumerate(self._rngs):
            noise = p.noise(rng, self._chunk)
            block[:, n] = p.theta[n] + p.noise_sigma * noise + p.bias(n, ts)
        self._block, self._start = block, self.t

    def next(self) -> np.ndarray:
        """Observation vector at the current step; advances the step counter."""
        if self.t - self._start >= len(self._block):
            self._refill()
        out = self._block[self.t - self._start]
        self.t += 1
        return out


def averaging_weight(c_mu: float, mu: float, t) -> np.ndarray:
    """Unclamped weight ``c_mu / (t+1)**mu``."""
    return c_mu / np.power(np.add(t, 1.0), mu)


@dataclass(frozen=True, eq=False)
class LocalAverageState:
    theta_bar: np.ndarray
    t: int
    c_mu: float
    mu: float

    def __post_init__(self):
        if not self.c_mu > 0:
            raise ValueError(f"c_mu must be positive, got {self.c_mu}")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        object.__setattr__(self, "theta_bar", np.asarray(self.theta_bar, dtype=float))


def update_local_average(state: LocalAverageState, observations) -> LocalAverageState:
    raw = float(averaging_weight(state.c_mu, state.mu, state.t))
    if raw > 1.0:
        warnings.warn(
            f"averaging weight {raw:.4g} at t={state.t} clamped to 1",
            AveragingWeightClamped,
            stacklevel=2,
        )
    rho = min(1.0, raw)
    obs = np.asarray(observations, dtype=float)
    theta_bar = state.theta_bar + rho * (obs - state.theta_bar)
    return replace(state, theta_bar=theta_bar, t=state.t + 1)


def lemma1_recursion(
    a1: float,
    mu: float,
    a2: float,
    delta: float,
    sigma: float,
    t_max: int,
    rng: np.random.Generator,
    *,
    z0: float = 1.0,
    n_paths: Optional[int] = None,
    record_every: int = 1,
    chunk: int = 4096,
) -> np.ndarray:
    """Simulate ``z(t+1) = (1 - r1) z(t) + r1 (r2 + w)`` with
    ``r1 = min(1, a1 (t+1)**-mu)``, ``r2 = a2 (t+1)**-delta`` and
    ``w ~ N(0, sigma**2)``.

    Returns ``z`` at ``t = 0, record_every, 2*record_every, ... <= t_max``,
    shape ``(k,)`` or ``(k, n_paths)`` when ``n_paths`` is given. Paths share
    ``rng``; noise for step ``t`` is row ``t`` of a ``(t_max, n_paths)`` draw.
    """
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    if not a1 > 0:
        raise ValueError(f"a1 must be positive, got {a1}")
    if a2 < 0 or sigma < 0 or not delta > 0:
        raise ValueError("need a2 >= 0, sigma >= 0, delta > 0")
    if a1 > 1:
        warnings.warn(f"a1={a1} > 1: step weight clamped to 1 while a1 (t+1)**-mu > 1",
                      AveragingWeightClamped, stacklevel=2)
    width = 1 if n_paths is None else int(n_paths)
    z = np.full(width, float(z0))
    out = [z.copy()]
    for start in range(0, t_max, chunk):
        stop = min(t_max, start + chunk)
        ts = np.arange(start, stop, dtype=float)
        r1 = np.minimum(1.0, a1 * (ts + 1.0) ** -mu)
        r2 = a2 * (ts + 1.0) ** -delta
        w = sigma * rng.standard_normal((stop - start, width))
        for s in range(stop - start):
            z = (1.0 - r1[s]) * z + r1[s] * (r2[s] + w[s])
            if (start + s + 1) % record_every == 0:
                out.append(z)
    traj = np.array(out)
    return traj[:, 0] if n_paths is None else traj
