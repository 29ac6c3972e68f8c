"""Counter-based splittable random streams.

Every randomized routine derives a Philox generator from a base seed plus
a structured key (purpose tag, grid point, replicate index, ...), so
draws are independent of thread scheduling and execution order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_part(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def substream(base_seed: int, *key) -> np.random.Generator:
    """Generator for the (base_seed, *key) substream."""
    ss = np.random.SeedSequence(entropy=int(base_seed),
                                spawn_key=tuple(_key_part(p) for p in key))
    return np.random.Generator(np.random.Philox(ss))
