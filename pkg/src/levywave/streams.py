"""Counter-based random streams keyed by (master seed, replicate, ...).

Every replicate draws from its own Philox stream whose key is derived from the
master seed and the replicate index through :class:`numpy.random.SeedSequence`.
Results therefore do not depend on the order in which replicates run, nor on
how many workers run them.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream ``(seed, *key)``.

    >>> a = stream(7, 3).random()
    >>> b = stream(7, 3).random()
    >>> a == b
    True
    """
    if not 0 <= seed <= SEED_MASK:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def replicate_streams(seed: int, start: int, stop: int, *key: int):
    """Streams for replicates ``start, ..., stop - 1`` under an optional tag."""
    return [stream(seed, *key, r) for r in range(start, stop)]
