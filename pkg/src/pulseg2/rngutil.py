"""Counter-based random substreams.

Every stochastic routine in the package derives its generators here: a
user seed is expanded into independent 64-bit roots, and each fixed block
of work (a slab of pulses, a chunk of field samples) gets its own Philox
generator keyed by (root, block index).  Because the partition into
blocks never depends on the worker count, merged output is bit-identical
whether blocks are processed serially or in parallel.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_roots", "block_generator"]


def derive_roots(seed, count: int = 4) -> np.ndarray:
    """Expand a user seed into ``count`` independent uint64 stream roots."""
    ss = np.random.SeedSequence(seed)
    return ss.generate_state(count, dtype=np.uint64)


def block_generator(root: np.uint64, block: int) -> np.random.Generator:
    """Generator for one work block, keyed by (root, block index)."""
    key = np.array([root, np.uint64(block)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
