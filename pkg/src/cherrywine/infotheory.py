"""Plug-in entropies and information contents of variable subsets.

All quantities are in bits (log base 2).  The information content of a
subset K is I(X_K) = sum_i H(X_i) - H(X_K); it is zero for singletons,
nonnegative, and monotone under set inclusion for plug-in estimates on a
common table.  These values drive both the tree weights and the closed-form
Kullback-Leibler divergence of junction-tree approximations.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import PreconditionError
from .ingest import DiscretizedSample

VertexSet = tuple[int, ...]


def _normalize_subset(K: Iterable[int], d: int) -> VertexSet:
    ks = tuple(sorted(int(v) for v in K))
    if not ks:
        raise PreconditionError("vertex set must be nonempty")
    if len(set(ks)) != len(ks):
        raise PreconditionError(f"duplicate vertices in {ks}")
    if ks[0] < 1 or ks[-1] > d:
        raise PreconditionError(f"vertex set {ks} out of range 1..{d}")
    return ks


def _subset_counts(ds: DiscretizedSample, K: VertexSet) -> np.ndarray:
    """Occupancy counts of the projection of the binned sample onto K."""
    cols = [v - 1 for v in K]
    span = 1
    for c in cols:
        span *= ds.m[c] + 1
    if span < 2**62:
        codes = np.zeros(ds.N, dtype=np.int64)
        for c in cols:
            codes = codes * (ds.m[c] + 1) + ds.bins[:, c]
        _, counts = np.unique(codes, return_counts=True)
    else:
        # mixed-radix codes would overflow int64: fall back to row dedup
        _, counts = np.unique(ds.bins[:, cols], axis=0, return_counts=True)
    return counts


def _entropy_bits(counts: np.ndarray, total: int) -> float:
    # H = log2(total) - sum(c*log2 c)/total; zero counts contribute nothing.
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    if c.size == 0 or total <= 0:
        raise PreconditionError("entropy of an empty table is undefined")
    return float(math.log2(total) - float(np.sum(c * np.log2(c))) / total)


@dataclass(frozen=True)
class MarginalTable:
    """Sparse projection counts of the binned sample onto a vertex subset."""

    subset: VertexSet
    counts: dict[tuple[int, ...], int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise PreconditionError("marginal counts do not sum to the total")
        for key in self.counts:
            if len(key) != len(self.subset):
                raise PreconditionError("tuple arity does not match subset size")


def marginal_table(ds: DiscretizedSample, K: Iterable[int]) -> MarginalTable:
    """Exact projection of the binned sample onto the subset K."""
    ks = _normalize_subset(K, ds.d)
    cols = [v - 1 for v in ks]
    uniq, cnt = np.unique(ds.bins[:, cols], axis=0, return_counts=True)
    counts = {tuple(int(v) for v in row): int(c) for row, c in zip(uniq, cnt)}
    return MarginalTable(ks, counts, ds.N)


def entropy(table: MarginalTable) -> float:
    """Plug-in entropy -sum (c/N) log2 (c/N) of a marginal table, in bits."""
    total = table.total
    terms = [
        c * math.log2(c) for _, c in sorted(table.counts.items()) if c > 0
    ]
    return math.log2(total) - math.fsum(terms) / total


class InfoCache:
    """Memoized entropies/information contents of one discretized sample.

    Thread-safe for concurrent lookups; a cached value always equals the
    uncached recomputation bit for bit (the computation is deterministic).
    Calling the cache with a vertex set returns its information content.
    """

    def __init__(self, ds: DiscretizedSample):
        self.ds = ds
        self._H: dict[VertexSet, float] = {}
        self._lock = threading.Lock()

    def entropy_bits(self, K: Iterable[int]) -> float:
        ks = _normalize_subset(K, self.ds.d)
        with self._lock:
            cached = self._H.get(ks)
        if cached is not None:
            return cached
        h = _entropy_bits(_subset_counts(self.ds, ks), self.ds.N)
        with self._lock:
            self._H.setdefault(ks, h)
        return h

    def __call__(self, K: Iterable[int]) -> float:
        ks = _normalize_subset(K, self.ds.d)
        if len(ks) == 1:
            return 0.0
        singles = [self.entropy_bits((v,)) for v in ks]
        return math.fsum(singles) - self.entropy_bits(ks)


def information_content(
    ds: DiscretizedSample, K: Iterable[int], cache: InfoCache | None = None
) -> float:
    """I(X_K) = sum_{i in K} H(X_i) - H(X_K), in bits.

    Zero for singletons by construction.  When a cache is supplied it must
    be bound to the same sample.
    """
    if cache is not None:
        if cache.ds is not ds:
            raise PreconditionError("cache is bound to a different sample")
        return cache(K)
    return InfoCache(ds)(K)
