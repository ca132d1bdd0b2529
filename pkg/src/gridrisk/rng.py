"""Counter-based random streams keyed by (master seed, realization, label).

Each realization owns independent streams, so ensemble results do not
depend on execution order or worker count.
"""

import zlib

import numpy as np


def stream(seed: int, realization: int, label: str) -> np.random.Generator:
    """Philox stream uniquely keyed by (seed, realization, label)."""
    key = zlib.crc32(label.encode())
    ss = np.random.SeedSequence((int(seed), int(realization), key))
    return np.random.Generator(np.random.Philox(ss))
