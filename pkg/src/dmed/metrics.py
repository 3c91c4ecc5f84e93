"""Median set, distances to it, consensus error and rate-scaled diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


class DuplicateValuesError(ValueError):
    """Local values are not pairwise distinct, so the minimal gap is zero."""


@dataclass(frozen=True)
class MedianSet:
    lo: float
    hi: float

    @property
    def kind(self) -> str:
        return "point" if self.lo == self.hi else "interval"

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


def _distinct_sorted(theta) -> np.ndarray:
    s = np.sort(np.asarray(theta, dtype=float).reshape(-1))
    if len(s) == 0:
        raise ValueError("need at least one value")
    if np.any(np.diff(s) == 0):
        raise DuplicateValuesError(f"values must be pairwise distinct; repeated {s[np.flatnonzero(np.diff(s) == 0)[0]]}")
    return s


def median_set(theta) -> MedianSet:
    """Middle order statistic for odd N; the closed interval between the two
    middle order statistics for even N."""
    s = _distinct_sorted(theta)
    n = len(s)
    if n % 2:
        m = float(s[n // 2])
        return MedianSet(m, m)
    return MedianSet(float(s[n // 2 - 1]), float(s[n // 2]))


def dist_to_set(x, m: MedianSet):
    """Distance from ``x`` (scalar or array) to the closed set ``m``."""
    d = np.maximum(m.lo - np.asarray(x, dtype=float), 0.0) + np.maximum(np.asarray(x, dtype=float) - m.hi, 0.0)
    return float(d) if d.ndim == 0 else d


def d_min(theta) -> float:
    s = _distinct_sorted(theta)
    if len(s) < 2:
        raise ValueError("minimal gap needs at least two values")
    return float(np.diff(s).min())


def consensus_error(x) -> float:
    """Euclidean norm of ``x`` minus its all-agents average vector."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean()))


def rms_dist(x, m: MedianSet) -> float:
    """``sqrt(sum_n dist(x_n, m)**2) / N``, the quantity plotted against t."""
    d = dist_to_set(np.asarray(x, dtype=float), m)
    return float(np.sqrt(np.sum(d * d)) / len(d))


@dataclass(frozen=True)
class MetricsRecord:
    t: int
    rms_dist: float
    mean_dist: float
    consensus_err: float
    scaled_dist: float
    scaled_consensus: float
    num_clipped: int


METRIC_FIELDS = tuple(f.name for f in fields(MetricsRecord) if f.name != "t")


def default_eps1(tau1: float, tau2: float) -> float:
    return 0.5 * (tau1 - tau2)


def measure(t: int, x, m: MedianSet, *, tau1: float, tau2: float, tau3: float,
            eps1: float, num_clipped: int) -> MetricsRecord:
    rms = rms_dist(x, m)
    cons = consensus_error(x)
    return MetricsRecord(
        t=int(t),
        rms_dist=rms,
        mean_dist=dist_to_set(float(np.mean(x)), m),
        consensus_err=cons,
        scaled_dist=(t + 1.0) ** tau3 * rms,
        scaled_consensus=(t + 1.0) ** (tau1 - tau2 + tau3 - eps1) * cons,
        num_clipped=int(num_clipped),
    )
