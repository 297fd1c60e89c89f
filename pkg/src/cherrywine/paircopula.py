"""Bivariate copula blocks and evaluation of truncated-vine densities.

Two families are supported: the independence copula (density 1, conditional
CDF h(u|v) = u) and the Gaussian copula with correlation rho.  A vine
density is the product of the univariate marginal densities and one pair
copula per vine edge, evaluated at conditional CDF values that are
propagated up the levels through h-functions: each level-L edge (a, b | D)
finds its arguments F(a|D) and F(b|D) among the h-outputs of its two parent
edges at level L-1, which exist and are unique by the proximity condition.
Truncated levels contribute a factor of one.

Conditional copulas are taken constant in the value of the conditioning
variables (the simplifying assumption standard in pair-copula modelling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DataError, PreconditionError
from .ingest import DiscretizedSample, Partition
from .vine import CherryWine, VineEdge, VineStructure, parse_edge_label

EPS = 1e-12
RHO_MAX = 0.9999

GAUSSIAN = "gaussian"
INDEPENDENCE = "independence"


@dataclass(frozen=True)
class PairCopula:
    """A bivariate copula family with its parameter (rho for gaussian)."""

    family: str
    rho: float | None = None

    def __post_init__(self):
        if self.family == INDEPENDENCE:
            if self.rho is not None:
                raise PreconditionError("independence copula takes no parameter")
        elif self.family == GAUSSIAN:
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise PreconditionError(
                    f"gaussian correlation must lie in (-1, 1), got {self.rho}"
                )
        else:
            raise PreconditionError(f"unknown copula family {self.family!r}")


INDEP = PairCopula(INDEPENDENCE)


def gaussian_copula(rho: float) -> PairCopula:
    return PairCopula(GAUSSIAN, float(rho))


def _clamp(u):
    return np.clip(np.asarray(u, dtype=float), EPS, 1.0 - EPS)


def pair_density(pc: PairCopula, u, v):
    """Copula density c(u, v); arguments are clamped to [eps, 1 - eps]."""
    u = _clamp(u)
    v = _clamp(v)
    if pc.family == INDEPENDENCE:
        out = np.ones_like(u)
        return float(out) if out.ndim == 0 else out
    rho = pc.rho
    x = ndtri(u)
    y = ndtri(v)
    s = 1.0 - rho * rho
    expo = -(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s)
    out = np.exp(expo) / math.sqrt(s)
    return float(out) if out.ndim == 0 else out


def h_function(pc: PairCopula, u, v):
    """Conditional CDF h(u | v) = dC(u, v)/dv, nondecreasing in u."""
    u = _clamp(u)
    v = _clamp(v)
    if pc.family == INDEPENDENCE:
        return float(u) if u.ndim == 0 else u
    rho = pc.rho
    out = ndtr((ndtri(u) - rho * ndtri(v)) / math.sqrt(1.0 - rho * rho))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PairCopulaAssignment:
    """Per-edge copula choices; unassigned edges default to independence."""

    copulas: dict[VineEdge, PairCopula] = field(default_factory=dict)

    def get(self, edge: VineEdge) -> PairCopula:
        return self.copulas.get(edge, INDEP)

    def to_json_dict(self) -> dict:
        out = {}
        for edge in sorted(self.copulas):
            pc = self.copulas[edge]
            entry: dict = {"family": pc.family}
            if pc.rho is not None:
                entry["rho"] = pc.rho
            out[edge.label()] = entry
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PairCopulaAssignment":
        copulas = {}
        for label, entry in obj.items():
            copulas[parse_edge_label(label)] = PairCopula(
                entry["family"], entry.get("rho")
            )
        return cls(copulas)


@dataclass(frozen=True, eq=False)
class MarginalModel:
    """Univariate CDF/density pairs used to map observations to copula scale."""

    cdfs: tuple[Callable, ...]
    pdfs: tuple[Callable, ...]

    @property
    def d(self) -> int:
        return len(self.cdfs)

    @classmethod
    def standard_normal(cls, d: int) -> "MarginalModel":
        def make():
            return (lambda x: ndtr(np.asarray(x, dtype=float)),
                    lambda x: np.exp(-0.5 * np.square(np.asarray(x, dtype=float)))
                    / math.sqrt(2.0 * math.pi))

        pairs = [make() for _ in range(d)]
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def from_partition(cls, partition: Partition) -> "MarginalModel":
        """Piecewise-linear CDF / piecewise-constant density per variable.

        Each bin carries its fitted occupancy mass spread uniformly over its
        interval; the density vanishes outside the partition's range.
        """
        cdfs = []
        pdfs = []
        for b, c in zip(partition.boundaries, partition.counts):
            total = int(c.sum())
            cum = np.concatenate([[0.0], np.cumsum(c) / total])
            widths = np.diff(b)
            heights = (c / total) / widths

            def cdf(x, b=b, cum=cum):
                return np.interp(np.asarray(x, dtype=float), b, cum)

            def pdf(x, b=b, heights=heights):
                x = np.asarray(x, dtype=float)
                idx = np.searchsorted(b, x, side="left") - 1
                inside = (x > b[0]) & (x <= b[-1])
                idx = np.clip(idx, 0, len(heights) - 1)
                return np.where(inside, heights[idx], 0.0)

            cdfs.append(cdf)
            pdfs.append(pdf)
        return cls(tuple(cdfs), tuple(pdfs))


def vine_copula_density(
    structure: VineStructure,
    assign: PairCopulaAssignment,
    U: np.ndarray,
) -> np.ndarray:
    """Copula density of the truncated vine at copula-scale points U (n x d)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != structure.d:
        raise PreconditionError(
            f"points have dimension {U.shape[1]}, structure has {structure.d}"
        )
    cond: dict[tuple[int, frozenset], np.ndarray] = {}
    for i in range(1, structure.d + 1):
        cond[(i, frozenset())] = _clamp(U[:, i - 1])
    dens = np.ones(U.shape[0])
    for tree in structure.trees:
        for e in tree:
            a, b = e.pair
            D = frozenset(e.given)
            try:
                ua = cond[(a, D)]
                ub = cond[(b, D)]
            except KeyError:
                raise PreconditionError(
                    f"edge {e.label()} has no parent edges supplying its "
                    "conditional arguments; the structure is not a valid vine"
                ) from None
            pc = assign.get(e)
            dens = dens * pair_density(pc, ua, ub)
            cond[(a, D | {b})] = np.asarray(h_function(pc, ua, ub))
            cond[(b, D | {a})] = np.asarray(h_function(pc, ub, ua))
    return dens


def vine_density(
    structure: VineStructure,
    assign: PairCopulaAssignment,
    marginals: MarginalModel,
    x,
) -> np.ndarray | float:
    """Joint density prod_k f_k(x_k) * vine copula density at F(x).

    Accepts a single point (length-d sequence) or an (n, d) array; returns
    a float or an array of densities accordingly.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.shape[1] != structure.d:
        raise PreconditionError(
            f"points have dimension {pts.shape[1]}, structure has {structure.d}"
        )
    if marginals.d != structure.d:
        raise PreconditionError("marginal model dimension mismatch")
    U = np.column_stack(
        [marginals.cdfs[i](pts[:, i]) for i in range(structure.d)]
    )
    base = np.ones(pts.shape[0])
    for i in range(structure.d):
        base = base * np.asarray(marginals.pdfs[i](pts[:, i]), dtype=float)
    out = base * vine_copula_density(structure, assign, U)
    return float(out[0]) if single else out


def pseudo_observations(ds: DiscretizedSample) -> np.ndarray:
    """Copula-scale sample: bin midpoints (j - 1/2)/m per variable."""
    return (ds.bins - 0.5) / np.asarray(ds.m, dtype=float)


def fit_gaussian_assignment(
    cw: CherryWine | VineStructure, ds: DiscretizedSample
) -> PairCopulaAssignment:
    """Sequential Gaussian fit along the vine.

    Level-1 edges receive the normal-scores correlation of their two
    pseudo-observation columns; higher-level edges correlate the h-function
    transforms produced by the already-fitted copulas below them.  Fitted
    correlations are clamped to |rho| <= 0.9999 so duplicated columns keep
    the density finite.
    """
    if ds.d != cw.d:
        raise PreconditionError(
            f"sample dimension {ds.d} does not match structure dimension {cw.d}"
        )
    U = pseudo_observations(ds)
    cond: dict[tuple[int, frozenset], np.ndarray] = {}
    for i in range(1, cw.d + 1):
        cond[(i, frozenset())] = _clamp(U[:, i - 1])
    copulas: dict[VineEdge, PairCopula] = {}
    for tree in cw.trees:
        for e in tree:
            a, b = e.pair
            D = frozenset(e.given)
            ua, ub = cond[(a, D)], cond[(b, D)]
            za, zb = ndtri(ua), ndtri(ub)
            if float(np.std(za)) == 0.0 or float(np.std(zb)) == 0.0:
                raise DataError(
                    f"edge {e.label()}: degenerate (constant) "
                    "pseudo-observation column"
                )
            rho = float(np.corrcoef(za, zb)[0, 1])
            rho = max(-RHO_MAX, min(RHO_MAX, rho))
            pc = gaussian_copula(rho)
            copulas[e] = pc
            cond[(a, D | {b})] = np.asarray(h_function(pc, ua, ub))
            cond[(b, D | {a})] = np.asarray(h_function(pc, ub, ua))
    return PairCopulaAssignment(copulas)
