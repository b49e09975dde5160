"""Deterministic, splittable random number streams."""

from __future__ import annotations

import hashlib

import numpy as np


class RngStream:
    """Named, splittable wrapper around numpy's PCG64 generator.

    The same seed always produces the same draw sequence. Child streams
    are derived from (seed, label) alone, never from draw order, so
    independent runs can be seeded up front and executed in any order.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.algorithm = "pcg64"
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def split(self, label: object) -> "RngStream":
        """Derive an independent stream identified by `label`."""
        digest = hashlib.sha256(f"{self.seed}/{label}".encode("utf-8")).digest()
        return RngStream(int.from_bytes(digest[:8], "little"))

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in [low, high), matching numpy semantics."""
        return self._gen.integers(low, high, size=size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def normal(self, size=None):
        return self._gen.standard_normal(size=size)

    def random(self, size=None):
        return self._gen.random(size=size)

    def permutation(self, n: int):
        return self._gen.permutation(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"
