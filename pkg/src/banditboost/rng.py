"""Seeded random number generation.

All randomness in the library flows through counter-based Philox
generators keyed by 64-bit seeds, so every run is bit-reproducible for a
given seed. Components that need independent streams derive them with
``spawn_generators``, which splits a root seed into statistically
independent children deterministically.
"""

from __future__ import annotations

import numpy as np

RngLike = int | np.random.Generator


def seeded_generator(seed: RngLike) -> np.random.Generator:
    """Return a Philox-backed Generator for ``seed``, or pass one through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def spawn_generators(seed: int, n: int) -> list[np.random.Generator]:
    """Split ``seed`` into ``n`` independent Philox generators."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def generator_from(seed_sequence: np.random.SeedSequence) -> np.random.Generator:
    """Wrap an already-derived SeedSequence in a Philox generator."""
    return np.random.Generator(np.random.Philox(seed_sequence))
