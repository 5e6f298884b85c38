"""Deterministic substream derivation for parallel-safe Monte Carlo.

Every stochastic routine in this package derives its generators through
:func:`substream`, so a run is reproducible for a given root seed no matter
how the work is chunked or scheduled.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int | np.random.SeedSequence, *path: int) -> np.random.Generator:
    """Return the generator for substream ``path`` under ``seed``.

    Substreams are keyed purely by ``(seed, path)``: replicate ``i`` of a
    Monte-Carlo loop should use ``substream(seed, i)`` and will see the same
    stream whether the loop runs serially or sharded across workers.  Paths
    may be nested, e.g. ``substream(seed, set_id, sim_id, role)``.
    """
    return np.random.default_rng(subseed(seed, *path))


def subseed(
    seed: int | np.random.SeedSequence, *path: int
) -> np.random.SeedSequence:
    """SeedSequence for substream ``path``; composable with further paths."""
    if isinstance(seed, np.random.SeedSequence):
        key = tuple(seed.spawn_key) + tuple(path)
        return np.random.SeedSequence(entropy=seed.entropy, spawn_key=key)
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer or SeedSequence, got {type(seed)!r}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(path))
