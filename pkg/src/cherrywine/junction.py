"""Junction trees, cherry junction trees, their densities, weights, and KL gap.

A junction tree is a tree over variable clusters whose edge separators are
the intersections of their endpoints and which satisfies the junction
property: for any two clusters, their intersection is contained in every
cluster along the tree path between them.  The associated density is

    P(X) = prod_C P(X_C) / prod_S P(X_S)^(nu_S - 1)

with one factor per distinct separator set S, where nu_S - 1 counts the
tree edges carrying S.  The weight of a tree under an information source I
is sum_C I(X_C) - sum_S (nu_S - 1) I(X_S); the Kullback-Leibler divergence
of the junction-tree approximation built from a joint's own marginals is
exactly I(X_V) minus that weight, so maximizing the weight minimizes the
divergence.

A k-th order cherry junction tree is the special case with all clusters of
size k and all separators of size k-1, constructed by repeatedly attaching
a new vertex to a (k-1)-subset of an existing cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, NumericalError, PreconditionError

Cluster = tuple[int, ...]


def cluster(vertices: Iterable[int]) -> Cluster:
    """Normalize a vertex collection into a sorted duplicate-free tuple."""
    vs = tuple(sorted(int(v) for v in vertices))
    if not vs:
        raise PreconditionError("cluster must be nonempty")
    if len(set(vs)) != len(vs):
        raise PreconditionError(f"duplicate vertices in cluster {vs}")
    return vs


def _intersect(a: Cluster, b: Cluster) -> Cluster:
    return tuple(sorted(set(a) & set(b)))


@dataclass(frozen=True)
class JunctionTree:
    """Clusters plus tree edges; each edge stores its derived separator."""

    clusters: tuple[Cluster, ...]
    edges: tuple[tuple[int, int, Cluster], ...]

    @property
    def vertices(self) -> Cluster:
        out: set[int] = set()
        for c in self.clusters:
            out.update(c)
        return tuple(sorted(out))

    @property
    def d(self) -> int:
        return len(self.vertices)

    @property
    def separators(self) -> tuple[Cluster, ...]:
        """Separator per edge (with repetition)."""
        return tuple(e[2] for e in self.edges)

    @property
    def nu(self) -> dict[Cluster, int]:
        """Distinct separator set -> number of clusters sharing it.

        Computed as (edges carrying the separator) + 1, which matches the
        count of clusters containing S whenever all those clusters form a
        subtree joined by S-edges (always true for cherry junction trees)
        and always yields the correct density exponent nu_S - 1.
        """
        mult: dict[Cluster, int] = {}
        for _, _, s in self.edges:
            mult[s] = mult.get(s, 0) + 1
        return {s: c + 1 for s, c in sorted(mult.items())}

    def neighbors(self, idx: int) -> list[tuple[int, Cluster]]:
        out = []
        for i, j, s in self.edges:
            if i == idx:
                out.append((j, s))
            elif j == idx:
                out.append((i, s))
        return out

    def to_json_dict(self) -> dict:
        return {
            "clusters": [list(c) for c in self.clusters],
            "edges": [[i, j] for i, j, _ in self.edges],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "JunctionTree":
        return junction_tree(obj["clusters"], obj["edges"])


def junction_tree(
    clusters: Sequence[Iterable[int]], edges: Sequence[Sequence[int]]
) -> JunctionTree:
    """Build a JunctionTree from clusters and (i, j) cluster-index pairs.

    Separators are derived as endpoint intersections and never stored
    redundantly.  Structural validity (tree shape, junction property) is
    checked separately by validate_junction_tree so that invalid structures
    can still be constructed and reported on.
    """
    cs = tuple(cluster(c) for c in clusters)
    es = []
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < len(cs)) or not (0 <= j < len(cs)) or i == j:
            raise PreconditionError(f"edge ({i}, {j}) references invalid clusters")
        a, b = (i, j) if i < j else (j, i)
        es.append((a, b, _intersect(cs[a], cs[b])))
    return JunctionTree(cs, tuple(es))


@dataclass(frozen=True)
class TCherryJunctionTree(JunctionTree):
    """Junction tree of order k: uniform cluster size k, separator size k-1.

    cherries records the construction trace: the first entry seeds the tree
    with the cluster separator + vertex, each later entry attaches its new
    vertex through a (k-1)-subset of an existing cluster.
    """

    k: int = 0
    cherries: tuple[tuple[int, Cluster], ...] = ()

    @property
    def seed_cluster(self) -> Cluster:
        v, s = self.cherries[0]
        return cluster(s + (v,))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        return "; ".join(
            f"{c.name}={'ok' if c.passed else 'FAIL'}"
            + (f" ({c.detail})" if c.detail and not c.passed else "")
            for c in self.checks
        )


def _is_tree(n: int, links: Sequence[tuple[int, int]]) -> bool:
    if n == 0:
        return False
    if len(links) != n - 1:
        return False
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j in links:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _tree_paths(jt: JunctionTree) -> dict[tuple[int, int], list[int]]:
    """Inner vertices of the tree path between every cluster pair."""
    n = len(jt.clusters)
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j, _ in jt.edges:
        adj[i].append(j)
        adj[j].append(i)
    paths: dict[tuple[int, int], list[int]] = {}
    for src in range(n):
        parent = {src: -1}
        order = [src]
        stack = [src]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in parent:
                    parent[w] = u
                    order.append(w)
                    stack.append(w)
        for dst in range(src + 1, n):
            if dst not in parent:
                continue
            path = []
            u = parent[dst]
            while u != -1 and u != src:
                path.append(u)
                u = parent[u]
            paths[(src, dst)] = path
    return paths


def _max_spanning_separator_weight(jt: JunctionTree) -> int:
    """Maximum total intersection size over spanning trees of the cluster graph."""
    n = len(jt.clusters)
    cand = []
    for i in range(n):
        for j in range(i + 1, n):
            w = len(set(jt.clusters[i]) & set(jt.clusters[j]))
            cand.append((-w, i, j))
    cand.sort()
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0
    used = 0
    for negw, i, j in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            total += -negw
            used += 1
            if used == n - 1:
                break
    return total


def validate_junction_tree(jt: JunctionTree, small_limit: int = 20) -> ValidityReport:
    """Report pass/fail for each junction-tree invariant.

    The junction (running-intersection) property is verified exactly by
    path containment for trees of up to small_limit clusters; larger trees
    use the maximum-spanning-tree criterion on separator sizes (the given
    tree's total separator size must attain the maximum over all spanning
    trees of the cluster graph).
    """
    checks: list[Check] = []
    n = len(jt.clusters)

    tree_ok = _is_tree(n, [(i, j) for i, j, _ in jt.edges])
    checks.append(
        Check(
            "tree_structure",
            tree_ok,
            "" if tree_ok else f"{n} clusters need {n - 1} connected edges",
        )
    )

    subset_bad = []
    for i in range(n):
        for j in range(n):
            if i != j and set(jt.clusters[i]) <= set(jt.clusters[j]):
                subset_bad.append((jt.clusters[i], jt.clusters[j]))
    checks.append(
        Check(
            "no_subset_clusters",
            not subset_bad,
            "" if not subset_bad else f"{subset_bad[0][0]} inside {subset_bad[0][1]}",
        )
    )

    empty = [(i, j) for i, j, s in jt.edges if not s]
    checks.append(
        Check(
            "nonempty_separators",
            not empty,
            "" if not empty else f"edge {empty[0]} has empty separator",
        )
    )

    if not tree_ok:
        checks.append(Check("running_intersection", False, "not a tree"))
        return ValidityReport(tuple(checks))

    if n <= small_limit:
        rip_ok = True
        detail = ""
        paths = _tree_paths(jt)
        for (i, j), inner in paths.items():
            inter = set(jt.clusters[i]) & set(jt.clusters[j])
            for t in inner:
                if not inter <= set(jt.clusters[t]):
                    rip_ok = False
                    detail = (
                        f"{jt.clusters[i]} and {jt.clusters[j]} intersect in "
                        f"{tuple(sorted(inter))} which is not inside {jt.clusters[t]}"
                    )
                    break
            if not rip_ok:
                break
    else:
        total = sum(len(s) for _, _, s in jt.edges)
        best = _max_spanning_separator_weight(jt)
        rip_ok = total == best
        detail = "" if rip_ok else f"separator weight {total} < achievable {best}"
    checks.append(Check("running_intersection", rip_ok, detail))
    return ValidityReport(tuple(checks))


def validate_tcherry_tree(t: TCherryJunctionTree) -> ValidityReport:
    """Junction-tree checks plus order-k structure and trace replay."""
    base = validate_junction_tree(t)
    checks = list(base.checks)

    size_ok = all(len(c) == t.k for c in t.clusters) and all(
        len(s) == t.k - 1 for _, _, s in t.edges
    )
    checks.append(
        Check(
            "uniform_order",
            size_ok,
            "" if size_ok else f"clusters must have size {t.k}, separators {t.k - 1}",
        )
    )

    replay_ok = True
    detail = ""
    if not t.cherries:
        replay_ok = False
        detail = "empty construction trace"
    else:
        v0, s0 = t.cherries[0]
        formed = [cluster(s0 + (v0,))]
        covered = set(formed[0])
        if len(formed[0]) != t.k:
            replay_ok = False
            detail = f"seed {formed[0]} has size {len(formed[0])}, expected {t.k}"
        for v, s in t.cherries[1:]:
            if not replay_ok:
                break
            if v in covered:
                replay_ok, detail = False, f"vertex {v} attached twice"
            elif len(s) != t.k - 1 or not any(set(s) <= set(c) for c in formed):
                replay_ok, detail = False, f"separator {s} not inside any cluster"
            else:
                formed.append(cluster(s + (v,)))
                covered.add(v)
        if replay_ok and set(formed) != set(t.clusters):
            replay_ok = False
            detail = "trace does not reproduce the cluster set"
        if replay_ok and covered != set(t.vertices):
            replay_ok = False
            detail = "trace does not cover all vertices"
    checks.append(Check("construction_trace", replay_ok, detail))
    return ValidityReport(tuple(checks))


def tcherry_from_junction(
    clusters: Sequence[Iterable[int]],
    edges: Sequence[Sequence[int]],
    k: int,
) -> TCherryJunctionTree:
    """Attach a canonical construction trace to an order-k junction tree.

    The trace is recovered by breadth-first search from the lexicographically
    smallest cluster; along each visited edge the one vertex outside the
    separator is the attached vertex.
    """
    jt = junction_tree(clusters, edges)
    n = len(jt.clusters)
    root = min(range(n), key=lambda i: jt.clusters[i])
    cherries: list[tuple[int, Cluster]] = []
    seed = jt.clusters[root]
    cherries.append((seed[-1], seed[:-1]))
    seen = {root}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for w, sep in sorted(jt.neighbors(u), key=lambda t: jt.clusters[t[0]]):
            if w in seen:
                continue
            new = set(jt.clusters[w]) - set(sep)
            if len(new) != 1:
                raise PreconditionError(
                    f"cluster {jt.clusters[w]} attaches through separator "
                    f"{sep} with {len(new)} new vertices, expected exactly 1"
                )
            cherries.append((new.pop(), sep))
            seen.add(w)
            queue.append(w)
    if len(seen) != n:
        raise PreconditionError("junction tree is not connected")
    return TCherryJunctionTree(jt.clusters, jt.edges, k=int(k), cherries=tuple(cherries))


def tcherry_from_cluster_set(cluster_set: Iterable[Iterable[int]], k: int) -> TCherryJunctionTree:
    """Canonical cherry junction tree over a valid order-k cluster set.

    Edges come from a deterministic maximum spanning tree of the cluster
    graph weighted by intersection sizes; for decomposable cluster sets any
    such tree is a junction tree, and for uniform order-k sets the separator
    multiset does not depend on which one is chosen.
    """
    cs = sorted(cluster(c) for c in cluster_set)
    n = len(cs)
    cand = sorted(
        (-len(set(cs[i]) & set(cs[j])), cs[i], cs[j], i, j)
        for i in range(n)
        for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, _, _, i, j in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return tcherry_from_junction(cs, edges, k)


# ---------------------------------------------------------------------------
# Densities, weights, divergences
# ---------------------------------------------------------------------------


def junction_density(
    jt: JunctionTree, marginals: Mapping[Cluster, Mapping[tuple, float]]
) -> Callable[[Sequence], float]:
    """Evaluator for prod_C P_C / prod_S P_S^(nu_S - 1) at full configurations.

    marginals must hold a table for every cluster and every distinct
    separator, keyed by value tuples in sorted-vertex order.  At a point
    where some cluster marginal vanishes the density is 0 (the 0/0
    convention); a vanishing separator marginal with all cluster marginals
    positive signals inconsistent inputs and raises.
    """
    for c in jt.clusters:
        if c not in marginals:
            raise PreconditionError(f"missing marginal table for cluster {c}")
    nu = jt.nu
    for s in nu:
        if s not in marginals:
            raise PreconditionError(f"missing marginal table for separator {s}")

    def extract(subset: Cluster, config: Sequence) -> tuple:
        return tuple(config[v - 1] for v in subset)

    def density(config: Sequence) -> float:
        num = 1.0
        for c in jt.clusters:
            p = marginals[c].get(extract(c, config), 0.0)
            if p == 0.0:
                return 0.0
            num *= p
        den = 1.0
        for s, mult in nu.items():
            p = marginals[s].get(extract(s, config), 0.0)
            if p == 0.0:
                raise NumericalError(
                    f"separator {s} has zero mass at {extract(s, config)} "
                    "while all cluster marginals are positive"
                )
            den *= p ** (mult - 1)
        return num / den

    return density


def tree_weight(jt: JunctionTree, info: Callable[[Cluster], float]) -> float:
    """sum_C I(X_C) - sum_S (nu_S - 1) I(X_S), in bits; larger fits better."""
    cluster_term = math.fsum(info(c) for c in jt.clusters)
    sep_term = math.fsum((mult - 1) * info(s) for s, mult in jt.nu.items())
    return cluster_term - sep_term


def kl_formula(jt: JunctionTree, joint: "DiscreteJoint") -> float:
    """Closed-form KL divergence of the junction-tree approximation, in bits.

    Equals I(X_V) minus the tree weight, every information content taken
    from the joint's own marginals; this matches the direct divergence
    sum p log2(p / p_hat) against the junction density built from those
    marginals, and vanishes exactly when the joint factorizes over the tree.
    """
    verts = jt.vertices
    if verts != tuple(range(1, joint.d + 1)):
        raise PreconditionError(
            f"tree covers {verts}, joint has variables 1..{joint.d}"
        )
    return joint.info(verts) - tree_weight(jt, joint.info)


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    """Explicit small-dimensional probability table used as a test oracle."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim < 1:
            raise PreconditionError("joint table needs at least one axis")
        if np.any(p < 0):
            raise DataError("joint table has negative entries")
        if abs(float(p.sum()) - 1.0) > 1e-9:
            raise DataError(f"joint table sums to {float(p.sum())}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return self.probs.ndim

    @property
    def ranges(self) -> tuple[int, ...]:
        return self.probs.shape

    def marginal(self, K: Iterable[int]) -> dict[tuple, float]:
        """Marginal table over sorted subset K; keys are value tuples."""
        ks = tuple(sorted(int(v) for v in K))
        axes = tuple(i for i in range(self.d) if (i + 1) not in ks)
        table = self.probs.sum(axis=axes) if axes else self.probs
        out = {}
        for idx in np.ndindex(*table.shape):
            p = float(table[idx])
            if p > 0.0:
                out[idx] = p
        return out

    def entropy(self, K: Iterable[int]) -> float:
        table = self.marginal(K)
        return -math.fsum(p * math.log2(p) for p in table.values())

    def info(self, K: Iterable[int]) -> float:
        ks = tuple(sorted(int(v) for v in K))
        singles = [self.entropy((v,)) for v in ks]
        return math.fsum(singles) - self.entropy(ks)

    def cells(self):
        """Iterate (config, probability) over all cells, zeros included."""
        for idx in np.ndindex(*self.probs.shape):
            yield idx, float(self.probs[idx])


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _label(vs: Cluster) -> str:
    return "{" + ",".join(str(v) for v in vs) + "}"


def junction_to_dot(jt: JunctionTree, name: str = "junction_tree") -> str:
    """Graphviz rendering of clusters (boxes) with separator-labelled edges."""
    lines = [f"graph {name} {{", "  node [shape=box];"]
    for i, c in enumerate(jt.clusters):
        lines.append(f'  c{i} [label="{_label(c)}"];')
    for i, j, s in jt.edges:
        lines.append(f'  c{i} -- c{j} [label="{_label(s)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
