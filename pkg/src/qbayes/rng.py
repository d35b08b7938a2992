"""Seedable, splittable random streams.

Everything random in the package goes through numpy's PCG64 via
``SeedSequence`` so that child streams are independent and reproducible.
"""
from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def split(seed: int | np.random.SeedSequence, count: int) -> list[np.random.SeedSequence]:
    """Derive ``count`` independent child seeds, in a fixed order."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(count)
