"""Static graphs, per-step random realizations with link dropout, and Laplacians.

A :class:`StaticGraph` is the base network whose links may fail. At every
step a :class:`GraphRealization` keeps each base edge independently with
probability ``1 - p_drop``; the realizations are i.i.d. across steps, so the
expected Laplacian is ``(1 - p_drop) * L(base)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union

import numpy as np

CONNECTIVITY_THRESHOLD = 1e-8


class GraphGenerationError(RuntimeError):
    pass


class EdgeListFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StaticGraph:
    """Undirected simple graph on nodes ``0 .. n_nodes - 1``.

    Edges are stored as sorted ``(i, j)`` pairs with ``i < j``. Use
    :meth:`from_edges` to build one from pairs in arbitrary orientation.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError(f"n_nodes must be positive, got {self.n_nodes}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_nodes} nodes")
            if i > j:
                raise ValueError(f"edge ({i}, {j}) not in canonical i < j order; use from_edges")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]]) -> "StaticGraph":
        """Canonicalize orientation, drop repeated pairs and sort."""
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            canon.add((min(i, j), max(i, j)))
        return cls(int(n_nodes), tuple(sorted(canon)))

    @classmethod
    def complete(cls, n_nodes: int) -> "StaticGraph":
        return cls(n_nodes, tuple((i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)))

    @classmethod
    def path(cls, n_nodes: int) -> "StaticGraph":
        return cls(n_nodes, tuple((i, i + 1) for i in range(n_nodes - 1)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> np.ndarray:
        """Edges as an ``(n_edges, 2)`` integer array."""
        arr = np.array(self.edges, dtype=np.intp).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_index.ravel(), minlength=self.n_nodes)


@dataclass(frozen=True, eq=False)
class GraphRealization:
    """One random instance of ``base``; ``mask[e]`` tells whether edge ``e`` is up."""

    base: StaticGraph
    mask: np.ndarray

    def __post_init__(self):
        if self.mask.shape != (self.base.n_edges,):
            raise ValueError(
                f"mask shape {self.mask.shape} does not match {self.base.n_edges} base edges"
            )

    @property
    def n_nodes(self) -> int:
        return self.base.n_nodes

    @property
    def active_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(e for e, up in zip(self.base.edges, self.mask) if up)

    @property
    def active_index(self) -> np.ndarray:
        return self.base.edge_index[self.mask]

    @classmethod
    def full(cls, base: StaticGraph) -> "GraphRealization":
        return cls(base, np.ones(base.n_edges, dtype=bool))


GraphLike = Union[StaticGraph, GraphRealization]


def _edge_index(g: GraphLike) -> np.ndarray:
    if isinstance(g, GraphRealization):
        return g.active_index
    return g.edge_index


def build_laplacian(g: GraphLike) -> np.ndarray:
    """Dense Laplacian ``D - A`` over the (active) edges of ``g``."""
    n = g.n_nodes
    lap = np.zeros((n, n))
    idx = _edge_index(g)
    if len(idx):
        i, j = idx[:, 0], idx[:, 1]
        lap[i, j] = -1.0
        lap[j, i] = -1.0
        deg = np.bincount(idx.ravel(), minlength=n)
        lap[np.diag_indices(n)] = deg
    return lap


def laplacian_apply(edge_index: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Compute ``L @ x`` from an ``(m, 2)`` edge array without forming ``L``."""
    n = x.shape[0]
    if len(edge_index) == 0:
        return np.zeros_like(x)
    i, j = edge_index[:, 0], edge_index[:, 1]
    diff = x[i] - x[j]
    return np.bincount(i, diff, n) - np.bincount(j, diff, n)


def lambda2(lap: np.ndarray) -> float:
    """Algebraic connectivity: second-smallest eigenvalue of a Laplacian.

    Uses the dense symmetric eigensolver; clipped at 0 from below since the
    exact value is nonnegative. A single-node graph has no second
    eigenvalue and returns 0.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.shape[0] < 2:
        return 0.0
    vals = np.linalg.eigvalsh(lap)
    return max(0.0, float(vals[1]))


def is_connected(g: GraphLike) -> bool:
    return g.n_nodes == 1 or lambda2(build_laplacian(g)) > CONNECTIVITY_THRESHOLD


def sample_dropout(g: StaticGraph, p_drop: float, rng: np.random.Generator) -> GraphRealization:
    """Keep each base edge independently with probability ``1 - p_drop``."""
    if not 0.0 <= p_drop < 1.0:
        raise ValueError(f"p_drop must lie in [0, 1), got {p_drop}")
    return GraphRealization(g, rng.random(g.n_edges) >= p_drop)


def sample_dropout_masks(
    g: StaticGraph, p_drop: float, rng: np.random.Generator, n_steps: int
) -> np.ndarray:
    """``n_steps`` consecutive dropout masks, row ``s`` identical to the
    ``s``-th of ``n_steps`` sequential :func:`sample_dropout` calls on ``rng``."""
    if not 0.0 <= p_drop < 1.0:
        raise ValueError(f"p_drop must lie in [0, 1), got {p_drop}")
    return rng.random((n_steps, g.n_edges)) >= p_drop


def _rgg_edges(points: np.ndarray, radius: float) -> list[tuple[int, int]]:
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    i, j = np.nonzero(np.triu(dist <= radius, k=1))
    return list(zip(i.tolist(), j.tolist()))


def generate_random_geometric(
    n_nodes: int, radius: float, rng: np.random.Generator, max_retries: int = 1000
) -> StaticGraph:
    """Connected random geometric graph in the unit square.

    Points are drawn uniformly; pairs at Euclidean distance ``<= radius`` are
    linked. Point sets are redrawn until the graph is connected.

    Raises
    ------
    GraphGenerationError
        If no connected graph appears within ``max_retries`` draws.
    """
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be at least 2, got {n_nodes}")
    if not 0.0 < radius <= math.sqrt(2.0):
        raise ValueError(f"radius must lie in (0, sqrt(2)], got {radius}")
    for _ in range(max_retries):
        points = rng.random((n_nodes, 2))
        g = StaticGraph.from_edges(n_nodes, _rgg_edges(points, radius))
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"no connected geometric graph on {n_nodes} nodes with radius {radius:g} "
        f"after {max_retries} draws; radius too small"
    )


def generate_for_lambda2(
    n_nodes: int,
    target: float,
    rng: np.random.Generator,
    tolerance: float = 0.5,
    max_attempts: int = 500,
) -> tuple[StaticGraph, float]:
    """Search the connection radius until a connected geometric graph has
    ``|lambda2 - target| <= tolerance``.

    Bisection on the radius, drawing a fresh point set at every probe. Since
    lambda2 is noisy at a fixed radius, the bracket is re-widened around the
    current radius whenever it collapses.

    Returns the graph and the radius that produced it.
    """
    if target < 0:
        raise ValueError(f"target lambda2 must be nonnegative, got {target}")
    if target > n_nodes:
        raise ValueError(f"lambda2 of a {n_nodes}-node graph cannot exceed {n_nodes}")
    lo, hi = 0.0, math.sqrt(2.0)
    for _ in range(max_attempts):
        radius = 0.5 * (lo + hi)
        try:
            g = generate_random_geometric(n_nodes, radius, rng, max_retries=20)
        except GraphGenerationError:
            lo = radius
            continue
        lam = lambda2(build_laplacian(g))
        if abs(lam - target) <= tolerance:
            return g, radius
        if lam < target:
            lo = radius
        else:
            hi = radius
        if hi - lo < 1e-4:
            lo, hi = max(0.0, radius - 0.05), min(math.sqrt(2.0), radius + 0.05)
    raise GraphGenerationError(
        f"no geometric graph on {n_nodes} nodes with lambda2 within {tolerance} of {target} "
        f"after {max_attempts} attempts"
    )


def write_edgelist(g: StaticGraph, path: Union[str, Path]) -> None:
    lines = [f"n_nodes={g.n_nodes}"] + [f"{i} {j}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path: Union[str, Path]) -> StaticGraph:
    """Parse the ``n_nodes=<N>`` header plus one ``i j`` pair per line.

    Blank lines and ``#`` comments are ignored.
    """
    path = Path(path)
    rows = [ln.split("#", 1)[0].strip() for ln in path.read_text().splitlines()]
    rows = [r for r in rows if r]
    if not rows or not rows[0].startswith("n_nodes="):
        raise EdgeListFormatError(f"{path}: missing 'n_nodes=<N>' header")
    try:
        n = int(rows[0].split("=", 1)[1])
        edges = []
        for lineno, r in enumerate(rows[1:], start=2):
            parts = r.split()
            if len(parts) != 2:
                raise EdgeListFormatError(f"{path}: line {lineno}: expected 'i j', got {r!r}")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        if isinstance(exc, EdgeListFormatError):
            raise
        raise EdgeListFormatError(f"{path}: {exc}") from exc
    try:
        return StaticGraph.from_edges(n, edges)
    except ValueError as exc:
        raise EdgeListFormatError(f"{path}: {exc}") from exc
