"""Deterministic splittable random streams on top of the Philox generator.

A Stream is an address ``(seed, path)`` in a derivation tree.  ``child(i, ...)``
appends indices to the path, ``generator()`` instantiates a numpy Generator
backed by the counter-based Philox 4x64 bit generator keyed via
``SeedSequence([seed, *path])``.  Philox output is fixed across platforms, so
two runs with the same seed and the same derivation paths produce identical
draws no matter how work is scheduled.

Convention used throughout the package: batch ``b`` of a replicated workload
always draws from ``stream.child(b)``, which makes results independent of the
worker count executing the batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Stream:
    """Address of a reproducible random stream."""

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", seed)
        path = tuple(int(i) for i in self.path)
        if any(i < 0 for i in path):
            raise ValueError("stream path indices must be nonnegative")
        object.__setattr__(self, "path", path)

    def child(self, *indices: int) -> "Stream":
        """Derive a sub-stream; distinct index tuples give independent streams."""
        return Stream(self.seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=[self.seed, *self.path])
        return np.random.Generator(np.random.Philox(seq))

    def describe(self) -> str:
        return "seed=%d path=%s" % (self.seed, ",".join(map(str, self.path)) or "-")


def as_stream(source: "Stream | int") -> Stream:
    """Coerce a seed or Stream into a Stream."""
    if isinstance(source, Stream):
        return source
    return Stream(int(source))


def as_generator(source: "Stream | int | np.random.Generator") -> np.random.Generator:
    """Coerce a Stream, raw seed, or ready Generator into a Generator."""
    if isinstance(source, np.random.Generator):
        return source
    return as_stream(source).generator()
