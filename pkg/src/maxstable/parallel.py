"""Deterministic batch scheduling for replicated workloads.

Thread count comes from the MAXSTABLE_THREADS environment variable (default 1)
and must never influence numerical results: work is cut into fixed-size
batches, each batch derives its own random stream from its batch index, and
results are assembled in batch order regardless of which worker ran what.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

ENV_THREADS = "MAXSTABLE_THREADS"

T = TypeVar("T")


def thread_count() -> int:
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
    return n


def batch_counts(total: int, batch: int) -> list[int]:
    """Split `total` items into fixed batches; the split depends only on (total, batch)."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    if batch < 1:
        raise ValueError("batch size must be positive")
    full, rest = divmod(total, batch)
    return [batch] * full + ([rest] if rest else [])


def run_batches(fn: Callable[[int, int], T], counts: Sequence[int]) -> list[T]:
    """Evaluate fn(batch_index, count) for every batch, results in batch order."""
    workers = min(thread_count(), max(len(counts), 1))
    if workers <= 1 or len(counts) <= 1:
        return [fn(b, c) for b, c in enumerate(counts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(counts)), counts))
