"""Deterministic, splittable seed derivation.

All randomness in the project flows through one root seed. Child streams are
derived with ``numpy.random.SeedSequence`` spawn keys built from a symbolic
path (e.g. ``("cell", i, j)``), so serial and parallel execution draw from
identical streams. Philox is used as the bit generator: it is counter-based
and produces the same sequence on every platform.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["child_sequence", "rng", "derive_seed"]


def _key_element(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"seed path elements must be non-negative, got {part}")
        return int(part)
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported seed path element: {part!r}")


def child_sequence(root_seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for the stream identified by ``path`` under ``root_seed``."""
    key = tuple(_key_element(p) for p in path)
    return np.random.SeedSequence(root_seed, spawn_key=key)


def rng(root_seed: int, *path) -> np.random.Generator:
    """Philox generator for the given stream."""
    return np.random.Generator(np.random.Philox(child_sequence(root_seed, *path)))


def derive_seed(root_seed: int, *path) -> int:
    """A plain 64-bit integer seed derived from the stream (for serialization)."""
    state = child_sequence(root_seed, *path).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
