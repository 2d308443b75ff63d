"""Seed management: named, splittable random streams.

Every stochastic routine in the package draws from a Philox counter-based
generator addressed by a master seed plus a path of labels, e.g.
``stream(seed, "moments", volume_index, "chain")``.  The split is performed
by ``numpy.random.SeedSequence`` with the encoded path appended to the
entropy pool, so sibling streams are statistically independent and the
whole hierarchy is reproducible from the master seed alone.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["seed_sequence", "stream", "derive_seed"]


def _encode(part) -> int:
    if isinstance(part, (bool, float)):
        raise TypeError(f"stream path parts must be int or str, got {part!r}")
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"stream path parts must be int or str, got {part!r}")


def seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence of the stream addressed by ``path`` under ``master_seed``."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(_encode(p) for p in path)
    return np.random.SeedSequence(entropy)


def stream(master_seed: int, *path) -> np.random.Generator:
    """Philox generator for the addressed stream."""
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, *path)))


def derive_seed(master_seed: int, *path) -> int:
    """Collapse a stream address into a plain integer seed.

    Used where a child component takes an integer seed of its own (sampler
    configs, per-draw sampler calls); the derived integer inherits the
    parent hierarchy.
    """
    return int(seed_sequence(master_seed, *path).generate_state(1, dtype=np.uint64)[0])
