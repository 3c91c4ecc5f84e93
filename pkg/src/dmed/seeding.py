"""Counter-keyed random substreams.

Every random quantity in a trial comes from a generator keyed on
``(base_seed, trial, purpose, index...)`` through numpy's ``SeedSequence``
spawn keys, so results do not depend on evaluation or scheduling order.
"""

from __future__ import annotations

from typing import Union

import numpy as np

OBSERVATION = 0
DROPOUT = 1
GRAPH = 2

SeedLike = Union[int, np.random.SeedSequence]


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def trial_seed(base_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(trial),))


def child(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in key))


def substream(seed: SeedLike, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child(seed, *key)))
