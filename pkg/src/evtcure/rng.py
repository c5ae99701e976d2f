"""Addressable random streams.

Every stream is a Philox generator keyed by ``(seed, *path)``; the path
encodes grid point, replication and resample indices, so results do not
depend on the order in which work is scheduled.
"""

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
