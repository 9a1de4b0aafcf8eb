"""Deterministic random streams.

Every stream wraps a numpy ``PCG64`` bit generator seeded from a
``SeedSequence``.  Child streams are derived by key rather than by a stateful
spawn counter, so ``RngStream(7).derive(3, 12)`` always denotes the same
stream no matter which process creates it or in what order.

Small integer draws go through :meth:`RngStream.randbelow`, which consumes
exactly one raw 64-bit word.  The compiled game kernel reads the same bit
generator through its C interface and applies the same reduction, so games
played by either backend are draw-for-draw identical.
"""
from __future__ import annotations

from typing import Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def reduce_draw(raw: int, n: int) -> int:
    """Map a raw 64-bit word onto ``range(n)`` by multiply-shift."""
    return ((raw >> 32) * n) >> 32


class RngStream:
    """A seedable, picklable-by-key random stream."""

    __slots__ = ("seed_seq", "bitgen", "gen")

    def __init__(self, seed: int | Sequence[int] | np.random.SeedSequence | None = 0):
        if isinstance(seed, np.random.SeedSequence):
            ss = seed
        else:
            ss = np.random.SeedSequence(seed)
        self.seed_seq = ss
        self.bitgen = np.random.PCG64(ss)
        self.gen = np.random.Generator(self.bitgen)

    @property
    def key(self) -> tuple[object, tuple[int, ...]]:
        """(entropy, spawn_key) pair that recreates this stream's seed."""
        return self.seed_seq.entropy, tuple(self.seed_seq.spawn_key)

    @classmethod
    def from_key(cls, key: tuple[object, tuple[int, ...]]) -> "RngStream":
        entropy, spawn_key = key
        return cls(np.random.SeedSequence(entropy, spawn_key=spawn_key))

    def derive(self, *path: int) -> "RngStream":
        """Child stream addressed by ``path``; independent of draw history."""
        ss = self.seed_seq
        return RngStream(
            np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(path))
        )

    def raw(self) -> int:
        return int(self.bitgen.random_raw())

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        return reduce_draw(int(self.bitgen.random_raw()), n)

    def pick(self, items: Sequence[T]) -> T:
        """Uniform choice; no draw is consumed for a single candidate."""
        if not items:
            raise ValueError("cannot pick from an empty sequence")
        if len(items) == 1:
            return items[0]
        return items[reduce_draw(int(self.bitgen.random_raw()), len(items))]

    def __repr__(self) -> str:
        entropy, spawn_key = self.key
        return f"RngStream(entropy={entropy}, spawn_key={spawn_key})"
