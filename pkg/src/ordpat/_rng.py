"""Seeded random streams.

Every stochastic routine draws from ``substream(seed, *key)``. Monte Carlo
trajectory ``i`` always uses key ``(i,)``, so results do not depend on how
trajectories are scheduled across workers.
"""

import numpy as np


def check_seed(seed):
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    return seed


def substream(seed, *key):
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
