"""Greedy construction of a maximum-weight cherry junction tree.

Candidates are (new vertex, (k-1)-element separator) pairs weighted by
w = I(separator + vertex) - I(separator).  The candidate list is sorted
once by decreasing weight; the search seeds with the top candidate's
cluster and then repeatedly merges the highest-weight candidate that is
currently admissible (vertex still uncovered, separator inside an existing
cluster).  Candidates rejected earlier are re-examined after every
acceptance via the same fixed ordering, so a candidate blocked only by a
missing separator can still be merged once that separator materializes.
The total weight telescopes to the junction-tree weight of the result.

Beyond k = 2 the number of order-k structures explodes combinatorially and
the greedy result carries no optimality guarantee, so an exhaustive oracle
over all structures is provided for small dimensions; at k = 2 the greedy
search coincides with building a maximum spanning tree on pairwise mutual
informations, which is exactly optimal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

from .errors import PreconditionError
from .infotheory import InfoCache
from .ingest import DiscretizedSample
from .junction import (
    Cluster,
    TCherryJunctionTree,
    cluster,
    tcherry_from_cluster_set,
    tree_weight,
)


@dataclass(frozen=True)
class HyperCherry:
    """A candidate attachment: new vertex, separator, and its weight in bits."""

    vertex: int
    separator: Cluster
    weight: float

    @property
    def cluster(self) -> Cluster:
        return cluster(self.separator + (self.vertex,))

    def label(self) -> str:
        return f"{self.vertex}|{','.join(str(v) for v in self.separator)}"


@dataclass(frozen=True)
class TraceEntry:
    action: str  # SEED / ACCEPT / REJECT
    vertex: int
    separator: Cluster
    weight: float
    reason: str = ""

    def __str__(self) -> str:
        head = f"{self.action} {self.vertex}|{','.join(map(str, self.separator))}"
        tail = f" w={self.weight:.6f}"
        if self.reason:
            tail += f" ({self.reason})"
        return head + tail


@dataclass(frozen=True)
class GreedyResult:
    tree: TCherryJunctionTree
    total_weight: float
    trace: tuple[TraceEntry, ...]

    def accepted(self) -> list[TraceEntry]:
        return [t for t in self.trace if t.action in ("SEED", "ACCEPT")]


def candidate_space(d: int, k: int) -> Iterator[tuple[int, Cluster]]:
    """Lazily yield all d * C(d-1, k-1) (vertex, separator) skeletons."""
    if not 2 <= k <= d:
        raise PreconditionError(f"order must satisfy 2 <= k <= d, got k={k}, d={d}")
    for v in range(1, d + 1):
        rest = [u for u in range(1, d + 1) if u != v]
        for sep in combinations(rest, k - 1):
            yield v, sep


def admissible(partial, cherry) -> bool:
    """True iff the cherry's vertex is uncovered and its separator lies in a cluster.

    partial may be a (possibly under-construction) cherry junction tree or
    any iterable of clusters.
    """
    clusters = getattr(partial, "clusters", partial)
    clusters = [cluster(c) for c in clusters]
    if not clusters:
        raise PreconditionError("partial tree must contain at least one cluster")
    if isinstance(cherry, HyperCherry):
        v, sep = cherry.vertex, cherry.separator
    else:
        v, sep = cherry
    sep = cluster(sep)
    covered = set()
    for c in clusters:
        covered.update(c)
    if v in covered:
        return False
    return any(set(sep) <= set(c) for c in clusters)


def build_tcherry_greedy(
    ds: DiscretizedSample, k: int, cache: InfoCache | None = None
) -> GreedyResult:
    """Grow an order-k cherry junction tree of (heuristically) maximal weight.

    Deterministic: weight ties are broken by lexicographically smallest
    (separator, vertex).  The result always covers every variable with
    exactly d - k + 1 clusters.  Variables that are constant after
    discretization are flagged with a warning; their information
    contributions are zero, which the plug-in estimator already yields.
    """
    d = ds.d
    if k > d:
        raise PreconditionError(f"order exceeds dimension (k={k} > d={d})")
    if k < 2:
        raise PreconditionError(f"order must be at least 2, got k={k}")
    constant = [i + 1 for i, mi in enumerate(ds.m) if mi == 1]
    if constant:
        warnings.warn(
            f"variables {constant} are constant after discretization; "
            "information contents involving them are zero",
            stacklevel=2,
        )
    if cache is None:
        cache = InfoCache(ds)

    cands = [
        HyperCherry(v, sep, cache(sep + (v,)) - cache(sep))
        for v, sep in candidate_space(d, k)
    ]
    cands.sort(key=lambda c: (-c.weight, c.separator, c.vertex))

    seed = cands[0]
    seed_cluster = seed.cluster
    clusters: list[Cluster] = [seed_cluster]
    edges: list[tuple[int, int]] = []
    cherries: list[tuple[int, Cluster]] = [(seed.vertex, seed.separator)]
    covered = set(seed_cluster)
    trace: list[TraceEntry] = [
        TraceEntry("SEED", seed.vertex, seed.separator, cache(seed_cluster))
    ]
    remaining = cands[1:]

    while len(covered) < d:
        progressed = False
        keep: list[HyperCherry] = []
        for pos, cand in enumerate(remaining):
            if cand.vertex in covered:
                trace.append(
                    TraceEntry(
                        "REJECT", cand.vertex, cand.separator, cand.weight,
                        "vertex already covered",
                    )
                )
                continue
            host = next(
                (i for i, c in enumerate(clusters) if set(cand.separator) <= set(c)),
                None,
            )
            if host is None:
                trace.append(
                    TraceEntry(
                        "REJECT", cand.vertex, cand.separator, cand.weight,
                        "separator not inside any cluster",
                    )
                )
                keep.append(cand)
                continue
            trace.append(
                TraceEntry("ACCEPT", cand.vertex, cand.separator, cand.weight)
            )
            clusters.append(cand.cluster)
            edges.append((host, len(clusters) - 1))
            cherries.append((cand.vertex, cand.separator))
            covered.add(cand.vertex)
            keep.extend(remaining[pos + 1 :])
            progressed = True
            break
        remaining = keep
        if not progressed:
            raise PreconditionError(
                "no admissible candidate left before covering all variables"
            )

    tree = TCherryJunctionTree(
        tuple(clusters),
        tuple((i, j, tuple(sorted(set(clusters[i]) & set(clusters[j])))) for i, j in edges),
        k=k,
        cherries=tuple(cherries),
    )
    total = tree_weight(tree, cache)
    return GreedyResult(tree, total, tuple(trace))


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def _submasks(mask: int, size: int) -> list[int]:
    bits = [b for b in range(mask.bit_length()) if mask >> b & 1]
    return [sum(1 << b for b in combo) for combo in combinations(bits, size)]


def enumerate_tcherry_cluster_sets(d: int, k: int) -> list[frozenset[int]]:
    """All distinct order-k cluster sets on d vertices, as bitmask sets.

    Breadth-first expansion of partial constructions with deduplication at
    every level; the separator multiset (hence weight and density) of a
    uniform order-k structure is a function of its cluster set alone, so
    cluster sets are the right unit of enumeration.
    """
    if not 2 <= k <= d:
        raise PreconditionError(f"order must satisfy 2 <= k <= d, got k={k}, d={d}")
    states: set[frozenset[int]] = {
        frozenset({sum(1 << b for b in combo)})
        for combo in combinations(range(d), k)
    }
    full = (1 << d) - 1
    for _ in range(d - k):
        nxt: set[frozenset[int]] = set()
        for state in states:
            covered = 0
            subs: set[int] = set()
            for cmask in state:
                covered |= cmask
                subs.update(_submasks(cmask, k - 1))
            free = full & ~covered
            for b in range(d):
                if free >> b & 1:
                    vbit = 1 << b
                    for smask in subs:
                        nxt.add(state | {smask | vbit})
        states = nxt
    return sorted(states, key=lambda s: sorted(s))


def _mask_to_cluster(mask: int) -> Cluster:
    return tuple(b + 1 for b in range(mask.bit_length()) if mask >> b & 1)


def enumerate_tcherry_structures(d: int, k: int) -> Iterator[TCherryJunctionTree]:
    """Canonical tree objects for every order-k cluster set on d vertices."""
    for state in enumerate_tcherry_cluster_sets(d, k):
        yield tcherry_from_cluster_set([_mask_to_cluster(m) for m in state], k)


def exhaustive_tcherry(
    ds: DiscretizedSample, k: int, limit: int = 7
) -> tuple[TCherryJunctionTree, float]:
    """Globally optimal order-k tree by enumeration; d must not exceed limit.

    The search walks the same deduplicated state space as the structure
    enumeration but carries each cluster set's weight along incrementally
    (every attachment adds I(cluster) - I(separator)); only the winning
    cluster set is materialized into a tree, whose weight is recomputed
    through tree_weight for exact consistency with that function.
    """
    d = ds.d
    if d > limit:
        raise PreconditionError(
            f"exhaustive search limited to d <= {limit}, got d={d}"
        )
    if not 2 <= k <= d:
        raise PreconditionError(f"order must satisfy 2 <= k <= d, got k={k}, d={d}")
    cache = InfoCache(ds)
    info_of: dict[int, float] = {}

    def info(mask: int) -> float:
        got = info_of.get(mask)
        if got is None:
            got = cache(_mask_to_cluster(mask))
            info_of[mask] = got
        return got

    states: dict[frozenset[int], float] = {}
    for combo in combinations(range(d), k):
        cmask = sum(1 << b for b in combo)
        states[frozenset({cmask})] = info(cmask)
    full = (1 << d) - 1
    submask_memo: dict[int, list[int]] = {}
    for _ in range(d - k):
        nxt: dict[frozenset[int], float] = {}
        for state, w in states.items():
            covered = 0
            subs: set[int] = set()
            for cmask in state:
                covered |= cmask
                got = submask_memo.get(cmask)
                if got is None:
                    got = _submasks(cmask, k - 1)
                    submask_memo[cmask] = got
                subs.update(got)
            free = full & ~covered
            for b in range(d):
                if free >> b & 1:
                    vbit = 1 << b
                    for smask in sorted(subs):
                        new_cluster = smask | vbit
                        new_state = state | {new_cluster}
                        if new_state not in nxt:
                            nxt[new_state] = w + info(new_cluster) - info(smask)
        states = nxt

    best_state: frozenset[int] | None = None
    best_w = -math.inf
    for state in sorted(states, key=lambda s: sorted(s)):
        w = states[state]
        if w > best_w + 1e-15:
            best_state, best_w = state, w
    assert best_state is not None
    tree = tcherry_from_cluster_set(
        [_mask_to_cluster(m) for m in best_state], k
    )
    return tree, tree_weight(tree, cache)
