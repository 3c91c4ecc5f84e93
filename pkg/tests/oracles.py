"""Independent reference implementations of one synchronous update."""

import numpy as np


def step_matrix(x, theta_bar, lap, a, b, g):
    """Stacked form with dense matrices: (I - b L) x - a K (x - theta_bar)."""
    d = x - theta_bar
    k = np.array([1.0 if abs(v) <= g else g / abs(v) for v in d])
    return (np.eye(len(x)) - b * lap) @ x - a * np.diag(k) @ d


def step_loop(x, theta_bar, neighbors, a, b, g):
    """Per-agent form: each agent reads only its own and its neighbors' time-t values."""
    out = []
    for n in range(len(x)):
        cons = sum(x[n] - x[m] for m in neighbors[n])
        gap = abs(x[n] - theta_bar[n])
        k = 1.0 if gap <= g else g / gap
        out.append(x[n] - b * cons - a * k * (x[n] - theta_bar[n]))
    return np.array(out)


def neighbor_lists(n, edges):
    nb = [[] for _ in range(n)]
    for i, j in edges:
        nb[i].append(j)
        nb[j].append(i)
    return nb
