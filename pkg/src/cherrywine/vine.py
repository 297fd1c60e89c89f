"""Truncated regular-vine structures derived from cherry junction trees.

A regular vine on d variables is a sequence of trees T_1..T_{d-1}: T_1
spans the variables, each later tree's nodes are the previous tree's edges,
and two edges may be joined only if they share a node (proximity).  Every
edge carries a conditioned pair {a, b} and a conditioning set D; a vine
truncated at level k keeps only T_1..T_{k-1} and treats all deeper pair
copulas as independence.

An order-k cherry junction tree whose separators themselves form an
order-(k-1) cherry junction tree collapses level by level into such a
truncated vine (here called a cherry vine structure):

  * the distinct separators of the order-m tree become clusters of the
    order-(m-1) tree, linked whenever two of them sit on edges meeting at a
    common cluster;
  * each leaf cluster (one containing a simplicial vertex, equivalently one
    whose incident separators all coincide) shrinks by deleting one
    non-simplicial vertex of its separator and attaches to that separator's
    cluster.

The choice of deleted vertex per leaf is free, so one junction tree yields
several vine structures; the level-m junction edges supply the pair-copula
edges (a, b | S) with a, b the vertices outside the shared separator S.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, factorial
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import PreconditionError
from .junction import (
    Check,
    Cluster,
    JunctionTree,
    TCherryJunctionTree,
    ValidityReport,
    junction_tree,
)


@dataclass(frozen=True, order=True)
class VineEdge:
    """Conditioned pair {a, b} given the (possibly empty) conditioning set D."""

    pair: tuple[int, int]
    given: Cluster = ()

    def __post_init__(self):
        a, b = sorted(int(v) for v in self.pair)
        g = tuple(sorted(int(v) for v in self.given))
        if a == b:
            raise PreconditionError(f"conditioned pair ({a}, {b}) must be distinct")
        if a in g or b in g:
            raise PreconditionError(
                f"conditioned pair ({a}, {b}) overlaps conditioning set {g}"
            )
        object.__setattr__(self, "pair", (a, b))
        object.__setattr__(self, "given", g)

    @property
    def level(self) -> int:
        return len(self.given) + 1

    @property
    def constraint_set(self) -> Cluster:
        return tuple(sorted(self.pair + self.given))

    @property
    def nodes(self) -> tuple[Cluster, Cluster]:
        """Constraint sets of the two tree nodes this edge joins."""
        a, b = self.pair
        return (
            tuple(sorted((a,) + self.given)),
            tuple(sorted((b,) + self.given)),
        )

    def label(self) -> str:
        head = f"{self.pair[0]},{self.pair[1]}"
        if self.given:
            return head + "|" + ",".join(str(v) for v in self.given)
        return head


def parse_edge_label(label: str) -> VineEdge:
    head, _, tail = label.partition("|")
    a, b = (int(t) for t in head.split(","))
    given = tuple(int(t) for t in tail.split(",")) if tail else ()
    return VineEdge((a, b), given)


@dataclass(frozen=True)
class VineStructure:
    """Trees T_1..T_L of a (possibly truncated) regular vine."""

    d: int
    trees: tuple[tuple[VineEdge, ...], ...]

    @property
    def truncation(self) -> int:
        return len(self.trees)

    def level(self, ell: int) -> tuple[VineEdge, ...]:
        return self.trees[ell - 1]

    def all_edges(self) -> list[VineEdge]:
        return [e for tree in self.trees for e in tree]

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "truncation": self.truncation,
            "trees": [
                {
                    "level": ell,
                    "edges": [
                        {"pair": list(e.pair), "given": list(e.given)}
                        for e in tree
                    ],
                }
                for ell, tree in enumerate(self.trees, start=1)
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "VineStructure":
        trees = []
        for entry in sorted(obj["trees"], key=lambda t: t["level"]):
            trees.append(
                tuple(
                    VineEdge(tuple(e["pair"]), tuple(e["given"]))
                    for e in entry["edges"]
                )
            )
        return cls(int(obj["d"]), tuple(trees))


LevelChoice = tuple  # ("pair", (a, b)) or ("deletions", ((leaf, vertex), ...))


@dataclass(frozen=True)
class CherryWine(VineStructure):
    """Vine structure plus the junction tree and choices it came from."""

    source: TCherryJunctionTree = None  # type: ignore[assignment]
    choices: tuple[tuple[int, LevelChoice], ...] = ()

    def structure_key(self) -> frozenset:
        """Dedup key: the set of (pair | given) edges across all levels."""
        return frozenset(self.all_edges())


# ---------------------------------------------------------------------------
# Shrinking an order-m tree to order m-1
# ---------------------------------------------------------------------------


def _leaf_info(jt: JunctionTree) -> dict[Cluster, Cluster]:
    """Map each leaf cluster to its single distinct incident separator.

    A cluster is a leaf exactly when all its incident edges carry the same
    separator set; the one vertex outside that separator is simplicial.
    Interior clusters carry at least two distinct separators whose union is
    the whole cluster.
    """
    incident: dict[int, set[Cluster]] = {i: set() for i in range(len(jt.clusters))}
    for i, j, s in jt.edges:
        incident[i].add(s)
        incident[j].add(s)
    leaves = {}
    for idx, seps in incident.items():
        if len(seps) == 1:
            leaves[jt.clusters[idx]] = next(iter(seps))
    return leaves


def _default_level_choice(jt: JunctionTree) -> LevelChoice:
    if len(jt.clusters) == 1:
        c = jt.clusters[0]
        return ("pair", (c[0], c[1]))
    leaves = _leaf_info(jt)
    return (
        "deletions",
        tuple(sorted((leaf, min(sep)) for leaf, sep in leaves.items())),
    )


def _level_choice_space(jt: JunctionTree) -> Iterator[LevelChoice]:
    """All valid choices for one shrinking step, in sorted order."""
    if len(jt.clusters) == 1:
        c = jt.clusters[0]
        for a, b in sorted(
            (c[i], c[j]) for i in range(len(c)) for j in range(i + 1, len(c))
        ):
            yield ("pair", (a, b))
        return
    leaves = sorted(_leaf_info(jt).items())
    options = [[(leaf, v) for v in sep] for leaf, sep in leaves]
    for combo in product(*options):
        yield ("deletions", tuple(combo))


def _shrink(jt: JunctionTree, m: int, choice: LevelChoice | None) -> JunctionTree:
    """One step of the vine collapse: order m tree -> order m-1 tree."""
    if choice is None:
        choice = _default_level_choice(jt)

    if len(jt.clusters) == 1:
        c = jt.clusters[0]
        kind, payload = choice
        if kind != "pair":
            raise PreconditionError(
                f"single-cluster level {m} needs a pair of vertices to delete"
            )
        a, b = payload
        if a == b or a not in c or b not in c:
            raise PreconditionError(
                f"invalid deletion pair ({a}, {b}) for cluster {c}"
            )
        left = tuple(v for v in c if v != a)
        right = tuple(v for v in c if v != b)
        return junction_tree([left, right], [(0, 1)])

    kind, payload = choice
    if kind != "deletions":
        raise PreconditionError(f"level {m} expects per-leaf deletion choices")
    deletions = dict(payload)
    leaves = _leaf_info(jt)
    if set(deletions) != set(leaves):
        raise PreconditionError(
            f"deletion choices must cover exactly the leaf clusters "
            f"{sorted(leaves)}, got {sorted(deletions)}"
        )

    # Step 1: distinct separators become clusters, linked through shared hosts.
    step1 = sorted(set(jt.separators))
    index = {s: i for i, s in enumerate(step1)}
    links: set[tuple[int, int]] = set()
    incident: dict[int, set[Cluster]] = {i: set() for i in range(len(jt.clusters))}
    for i, j, s in jt.edges:
        incident[i].add(s)
        incident[j].add(s)
    for seps in incident.values():
        distinct = sorted(seps)
        for x in range(len(distinct)):
            for y in range(x + 1, len(distinct)):
                a, b = index[distinct[x]], index[distinct[y]]
                links.add((min(a, b), max(a, b)))
    if len(links) != len(step1) - 1 or not _connected(len(step1), links):
        raise PreconditionError(
            f"separators of the order-{m} tree do not form an "
            f"order-{m - 1} cherry junction tree"
        )

    # Step 2: shrink each leaf by its chosen non-simplicial vertex and attach
    # it to its separator's cluster.
    clusters = list(step1)
    edges = [list(link) for link in sorted(links)]
    for leaf, sep in sorted(leaves.items()):
        drop = deletions[leaf]
        if drop not in sep:
            simplicial = tuple(set(leaf) - set(sep))
            raise PreconditionError(
                f"cannot delete {drop} from leaf {leaf}: the deleted vertex "
                f"must be non-simplicial (in {sep}, not {simplicial})"
            )
        shrunk = tuple(v for v in leaf if v != drop)
        clusters.append(shrunk)
        edges.append([index[sep], len(clusters) - 1])
    return junction_tree(clusters, edges)


def _connected(n: int, links: Iterable[tuple[int, int]]) -> bool:
    if n == 0:
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


def _vine_from_levels(
    tree: TCherryJunctionTree, levels: Mapping[int, JunctionTree],
    choices: tuple[tuple[int, LevelChoice], ...],
) -> CherryWine:
    d = tree.d
    k = tree.k
    t1 = tuple(sorted(VineEdge(c) for c in levels[2].clusters))
    trees: list[tuple[VineEdge, ...]] = [t1]
    for ell in range(2, k):
        jt = levels[ell]
        level_edges = []
        for i, j, s in jt.edges:
            a = set(jt.clusters[i]) - set(s)
            b = set(jt.clusters[j]) - set(s)
            if len(a) != 1 or len(b) != 1:
                raise PreconditionError(
                    f"junction edge between {jt.clusters[i]} and "
                    f"{jt.clusters[j]} does not define a conditioned pair"
                )
            level_edges.append(VineEdge((a.pop(), b.pop()), s))
        trees.append(tuple(sorted(level_edges)))
    return CherryWine(d, tuple(trees), source=tree, choices=choices)


def cherry_to_vine(
    tree: TCherryJunctionTree,
    choices: Mapping[int, LevelChoice] | None = None,
) -> CherryWine:
    """Collapse an order-k cherry junction tree into its truncated vine.

    choices maps a level m (k down to 3) to the shrinking choice for that
    level: ("pair", (a, b)) when the level-m tree is a single cluster,
    otherwise ("deletions", ((leaf_cluster, deleted_vertex), ...)).  Omitted
    levels use the deterministic default: delete the smallest-index
    non-simplicial vertex of each leaf (the two smallest vertices for a
    single cluster).

    Raises when a level's separators fail to form the next-lower-order
    cherry junction tree, or when a choice deletes a simplicial vertex or
    names a cluster that is not a leaf.
    """
    k, d = tree.k, tree.d
    if not 2 <= k <= d:
        raise PreconditionError(f"order must satisfy 2 <= k <= d, got k={k}, d={d}")
    levels: dict[int, JunctionTree] = {k: tree}
    used: list[tuple[int, LevelChoice]] = []
    for m in range(k, 2, -1):
        choice = choices.get(m) if choices else None
        if choice is None:
            choice = _default_level_choice(levels[m])
        levels[m - 1] = _shrink(levels[m], m, choice)
        used.append((m, choice))
    return _vine_from_levels(tree, levels, tuple(used))


def enumerate_cherry_wines(tree: TCherryJunctionTree) -> list[CherryWine]:
    """All distinct vine structures reachable through valid shrink choices.

    Structures are considered equal when they share the same edge set
    (pair | conditioning set) across all levels; enumeration order follows
    sorted choice vectors and keeps the first representative of each class.
    """
    k = tree.k
    results: list[CherryWine] = []
    seen: set[frozenset] = set()

    def recurse(levels: dict[int, JunctionTree], m: int, acc: list):
        if m == 2:
            wine = _vine_from_levels(tree, levels, tuple(acc))
            key = wine.structure_key()
            if key not in seen:
                seen.add(key)
                results.append(wine)
            return
        for choice in _level_choice_space(levels[m]):
            nxt = dict(levels)
            nxt[m - 1] = _shrink(levels[m], m, choice)
            recurse(nxt, m - 1, acc + [(m, choice)])

    recurse({k: tree}, k, [])
    return results


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_vine(v: VineStructure) -> ValidityReport:
    """Per-invariant report: tree shapes, level arity, and proximity."""
    checks: list[Check] = []

    counts_ok = True
    detail = ""
    for ell, tree in enumerate(v.trees, start=1):
        if len(tree) != v.d - ell:
            counts_ok = False
            detail = f"level {ell} has {len(tree)} edges, expected {v.d - ell}"
            break
        for e in tree:
            if e.level != ell:
                counts_ok = False
                detail = f"edge {e.label()} stored at level {ell}"
                break
        if not counts_ok:
            break
    checks.append(Check("level_edge_counts", counts_ok, detail))

    t1 = v.trees[0] if v.trees else ()
    verts = set(range(1, v.d + 1))
    t1_ok = (
        len(t1) == v.d - 1
        and all(set(e.pair) <= verts and not e.given for e in t1)
        and _connected_pairs(verts, [e.pair for e in t1])
    )
    checks.append(
        Check(
            "first_tree_spans",
            t1_ok,
            "" if t1_ok else "level 1 is not a spanning tree on the variables",
        )
    )

    prox_ok = True
    detail = ""
    prev: dict[Cluster, VineEdge] = {}
    for e in t1:
        prev[e.constraint_set] = e
    for ell in range(2, v.truncation + 1):
        cur: dict[Cluster, VineEdge] = {}
        node_pairs = []
        for e in v.level(ell):
            n1, n2 = e.nodes
            e1, e2 = prev.get(n1), prev.get(n2)
            if e1 is None or e2 is None:
                prox_ok = False
                detail = (
                    f"edge {e.label()} references missing level-{ell - 1} "
                    f"node(s) {n1 if e1 is None else n2}"
                )
                break
            if ell == 2:
                shared = set(e1.pair) & set(e2.pair)
            else:
                shared = set(e1.nodes) & set(e2.nodes)
            if not shared:
                prox_ok = False
                detail = (
                    f"edge {e.label()} joins {e1.label()} and {e2.label()} "
                    "which share no node"
                )
                break
            if e.constraint_set in cur:
                prox_ok = False
                detail = f"duplicate constraint set {e.constraint_set}"
                break
            cur[e.constraint_set] = e
            node_pairs.append((n1, n2))
        if not prox_ok:
            break
        if not _connected_pairs(set(prev), node_pairs):
            prox_ok = False
            detail = f"level {ell} is not a tree on the level-{ell - 1} edges"
            break
        prev = cur
    checks.append(Check("proximity", prox_ok, detail))
    return ValidityReport(tuple(checks))


def _connected_pairs(nodes: set, pairs: Sequence[tuple]) -> bool:
    nodes = set(nodes)
    if not nodes:
        return False
    adj: dict = {u: [] for u in nodes}
    for a, b in pairs:
        if a not in adj or b not in adj:
            return False
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


# ---------------------------------------------------------------------------
# Counting and listing
# ---------------------------------------------------------------------------


def count_regular_vines(d: int) -> int:
    """Number of labelled regular vines on d variables: (d!/2) * 2^C(d-2, 2)."""
    if not 2 <= d <= 20:
        raise PreconditionError(f"count supported for 2 <= d <= 20, got d={d}")
    return factorial(d) // 2 * 2 ** comb(d - 2, 2)


def pair_copula_list(cw: VineStructure) -> list[VineEdge]:
    """Edges of T_1..T_L in level order: the pair-copula factors of the density."""
    return cw.all_edges()


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def vine_level_to_dot(v: VineStructure, ell: int) -> str:
    """Graphviz rendering of one vine tree; nodes are constraint-set labels."""
    lines = [f"graph vine_tree_{ell} {{", "  node [shape=ellipse];"]

    def node_id(cs: Cluster) -> str:
        return "n_" + "_".join(str(x) for x in cs)

    seen = set()
    for e in v.level(ell):
        for cs in e.nodes:
            if cs not in seen:
                seen.add(cs)
                label = ",".join(str(x) for x in cs)
                lines.append(f'  {node_id(cs)} [label="{label}"];')
    for e in v.level(ell):
        n1, n2 = e.nodes
        lines.append(
            f'  {node_id(n1)} -- {node_id(n2)} [label="{e.label()}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
