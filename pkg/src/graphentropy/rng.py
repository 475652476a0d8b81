"""Named, splittable random streams.

Every stochastic routine takes an integer seed; independent streams are
derived from it by a key path such as ``("points", chunk)``. A stream
depends only on the seed and its key, never on how many other streams
were drawn before, so chunked or parallel evaluation reproduces serial
results exactly.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream keys must be nonnegative")
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def stream(seed: int, *keys) -> np.random.Generator:
    """Generator for the stream named ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
