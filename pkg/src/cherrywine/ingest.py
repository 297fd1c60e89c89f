"""Sample ingestion and equal-frequency discretization onto the unit grid.

A raw N x d sample is binned per variable into intervals holding (as nearly
as possible) the same number of observations.  Each observation is replaced
by the grid value u = j/m of its bin, which turns the empirical distribution
into a discrete copula: every univariate margin is uniform over its bins.
The joint cell frequencies of the binned sample form the sample-derived
copula density used by the structure-learning stages.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, PreconditionError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated rectangular sample: N rows of d real-valued observations."""

    values: np.ndarray
    names: tuple[str, ...]
    source_sha256: str | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise DataError("dataset must be a 2-d table")
        n, d = vals.shape
        if n < 2:
            raise DataError(f"N >= 2 required, got N={n}")
        if d < 2:
            raise DataError(f"d >= 2 required, got d={d}")
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise DataError(
                f"non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        if len(self.names) != d:
            raise DataError("number of column names must match dimension")
        if len(set(self.names)) != d:
            raise DataError("column names must be unique")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        """Values of variable i (1-based id)."""
        return self.values[:, i - 1]


def load_csv(path, header: bool | None = None) -> Dataset:
    """Load a comma-separated numeric table into a Dataset.

    Parameters
    ----------
    path:
        UTF-8 CSV file, decimal point, optional header row.
    header:
        True/False to force header handling, None to auto-detect (a first
        row with any non-numeric token is treated as a header).

    Raises
    ------
    DataError
        On parse failures (with row/column cited), non-finite values,
        duplicate header names, ragged rows, or dimension/size violations.
    """
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    digest = hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8")
    rows = [row for row in csv.reader(text.splitlines()) if row]
    if not rows:
        raise DataError(f"{path}: file is empty")

    def parse_row(row: list[str], lineno: int) -> list[float]:
        out = []
        for j, tok in enumerate(row):
            try:
                out.append(float(tok))
            except ValueError:
                raise DataError(
                    f"{path}: cannot parse {tok!r} at row {lineno}, column {j + 1}"
                ) from None
        return out

    names: tuple[str, ...] | None = None
    first_is_header = header
    if first_is_header is None:
        try:
            parse_row(rows[0], 1)
            first_is_header = False
        except DataError:
            first_is_header = True
    start = 0
    if first_is_header:
        names = tuple(tok.strip() for tok in rows[0])
        if len(set(names)) != len(names):
            raise DataError(f"{path}: duplicate header names")
        start = 1

    data_rows = rows[start:]
    if not data_rows:
        raise DataError(f"{path}: no data rows")
    width = len(data_rows[0])
    if width < 2:
        raise DataError(f"{path}: d >= 2 required, got d={width}")
    values = []
    for i, row in enumerate(data_rows):
        lineno = i + start + 1
        if len(row) != width:
            raise DataError(
                f"{path}: row {lineno} has {len(row)} fields, expected {width}"
            )
        parsed = parse_row(row, lineno)
        for j, v in enumerate(parsed):
            if not math.isfinite(v):
                raise DataError(
                    f"{path}: non-finite value at row {lineno}, column {j + 1}"
                )
        values.append(parsed)
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(width))
    return Dataset(np.array(values, dtype=float), names, source_sha256=digest)


@dataclass(frozen=True, eq=False)
class Partition:
    """Per-variable interval boundaries with (near-)equal bin occupancy.

    boundaries[i] has m_i + 1 strictly increasing entries; interior entries
    are observed sample values.  counts[i] records how many fitting
    observations fall in each half-open bin (x_{j-1}, x_j].
    """

    boundaries: tuple[np.ndarray, ...]
    counts: tuple[np.ndarray, ...]

    def __post_init__(self):
        for b in self.boundaries:
            b.setflags(write=False)
        for c in self.counts:
            c.setflags(write=False)

    @property
    def d(self) -> int:
        return len(self.boundaries)

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(len(b) - 1 for b in self.boundaries)

    def to_json_dict(self) -> dict:
        return {
            "m": list(self.m),
            "boundaries": [[float(x) for x in b] for b in self.boundaries],
            "counts": [[int(c) for c in cs] for cs in self.counts],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Partition":
        bounds = tuple(np.array(b, dtype=float) for b in obj["boundaries"])
        counts = tuple(np.array(c, dtype=int) for c in obj["counts"])
        return cls(bounds, counts)


def _normalize_bin_counts(m, d: int, N: int) -> list[int]:
    if isinstance(m, (int, np.integer)):
        ms = [int(m)] * d
    else:
        ms = [int(v) for v in m]
        if len(ms) != d:
            raise PreconditionError(
                f"expected {d} bin counts, got {len(ms)}"
            )
    for mi in ms:
        if mi < 1:
            raise PreconditionError(f"bin count must be >= 1, got {mi}")
        if mi > N:
            raise PreconditionError(f"bin count {mi} exceeds sample size {N}")
    return ms


def uniform_partition(data: Dataset, m) -> Partition:
    """Build the equal-frequency partition of each variable's range.

    With N = q*m_i + r, the first r bins hold q+1 observations and the rest
    hold q (deterministic remainder policy).  Interior boundaries are placed
    on sample values; when a boundary would split a run of tied values it is
    moved to the last occurrence of the tie, so equal values never end up in
    different bins.  The lower endpoint sits one unit of spread below the
    smallest observation, the upper endpoint is the largest observation.
    """
    ms = _normalize_bin_counts(m, data.d, data.N)
    N = data.N
    bounds: list[np.ndarray] = []
    counts: list[np.ndarray] = []
    for i in range(data.d):
        mi = ms[i]
        col = np.sort(data.values[:, i])
        lo, hi = float(col[0]), float(col[-1])
        if mi >= 2 and lo == hi:
            raise DataError(
                f"column {data.names[i]!r}: all values identical, "
                "no valid interior boundary exists"
            )
        spread = hi - lo
        x0 = lo - (spread if spread > 0.0 else 1.0)
        base, extra = divmod(N, mi)
        targets = [base + 1 if j < extra else base for j in range(mi)]
        cum = np.cumsum(targets)
        b = [x0]
        idxs = []
        prev = -1
        for j in range(mi - 1):
            t = max(int(cum[j]) - 1, prev + 1)
            if t >= N - 1:
                raise DataError(
                    f"column {data.names[i]!r}: too many tied values to "
                    f"form {mi} non-empty bins"
                )
            v = col[t]
            # never split a run of equal values: extend the boundary to the
            # run's last occurrence, or back off before the run when that
            # would leave the remaining bins empty
            fwd = int(np.searchsorted(col, v, side="right")) - 1
            if fwd <= N - 2:
                idx = fwd
            else:
                idx = int(np.searchsorted(col, v, side="left")) - 1
                if idx <= prev:
                    raise DataError(
                        f"column {data.names[i]!r}: too many tied values to "
                        f"form {mi} non-empty bins"
                    )
            b.append(float(col[idx]))
            idxs.append(idx)
            prev = idx
        b.append(hi)
        idxs.append(N - 1)
        occ = np.diff([-1] + idxs)
        bounds.append(np.array(b, dtype=float))
        counts.append(occ.astype(int))
    return Partition(tuple(bounds), tuple(counts))


@dataclass(frozen=True, eq=False)
class DiscretizedSample:
    """Sample mapped to per-variable bin indices 1..m_i with grid u = j/m."""

    bins: np.ndarray
    m: tuple[int, ...]

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.int64)
        if b.ndim != 2 or b.shape[1] != len(self.m):
            raise DataError("bin matrix shape does not match bin counts")
        for i, mi in enumerate(self.m):
            col = b[:, i]
            if col.min() < 1 or col.max() > mi:
                raise DataError(f"bin index out of range in column {i + 1}")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))

    @property
    def N(self) -> int:
        return self.bins.shape[0]

    @property
    def d(self) -> int:
        return self.bins.shape[1]

    def grid(self, i: int) -> np.ndarray:
        """Grid values u_j = j/m_i, j = 0..m_i, for variable i (1-based)."""
        mi = self.m[i - 1]
        return np.arange(mi + 1) / mi

    def grid_values(self, i: int) -> np.ndarray:
        """Per-observation grid value j/m_i of variable i (1-based)."""
        return self.bins[:, i - 1] / self.m[i - 1]

    def to_json_dict(self) -> dict:
        return {"m": list(self.m), "bins": self.bins.tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DiscretizedSample":
        return cls(np.array(obj["bins"], dtype=np.int64), tuple(obj["m"]))


def discretize(data: Dataset, partition: Partition) -> DiscretizedSample:
    """Map each observation to the bin whose interval (x_{j-1}, x_j] holds it.

    The partition must cover the data's range; values at or below the lower
    endpoint or above the upper endpoint are rejected (this can only happen
    when discretizing data foreign to the fitted partition).
    """
    if partition.d != data.d:
        raise PreconditionError(
            f"partition dimension {partition.d} != data dimension {data.d}"
        )
    cols = []
    for i in range(data.d):
        b = partition.boundaries[i]
        col = data.values[:, i]
        low = col <= b[0]
        high = col > b[-1]
        if low.any() or high.any():
            row = int(np.argwhere(low | high)[0][0])
            raise DataError(
                f"observation at row {row + 1}, column {i + 1} lies outside "
                "the partition range"
            )
        cols.append(np.searchsorted(b[1:], col, side="left") + 1)
    return DiscretizedSample(np.column_stack(cols), tuple(partition.m))


@dataclass(frozen=True, eq=False)
class SampleCopulaDensity:
    """Sparse joint cell-frequency table of a discretized sample.

    Keys are d-tuples of bin indices, values are cell masses count/N.  At
    most N cells are nonzero; every margin is uniform up to the remainder
    policy of the partition.
    """

    cells: dict[tuple[int, ...], float]
    m: tuple[int, ...]
    N: int

    def total_mass(self) -> float:
        return math.fsum(self.cells.values())

    def marginal(self, i: int) -> dict[int, float]:
        """Exact margin of variable i (1-based): sum of counts, divided once."""
        acc: dict[int, int] = {}
        for key, mass in self.cells.items():
            cnt = int(round(mass * self.N))
            acc[key[i - 1]] = acc.get(key[i - 1], 0) + cnt
        return {j: c / self.N for j, c in sorted(acc.items())}

    def to_json_dict(self) -> dict:
        cells = [
            [*key, mass] for key, mass in sorted(self.cells.items())
        ]
        return {"m": list(self.m), "n": self.N, "cells": cells}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SampleCopulaDensity":
        cells = {}
        for entry in obj["cells"]:
            *idx, mass = entry
            cells[tuple(int(v) for v in idx)] = float(mass)
        return cls(cells, tuple(obj["m"]), int(obj["n"]))


def sample_copula(ds: DiscretizedSample) -> SampleCopulaDensity:
    """Tabulate joint cell frequencies of the binned sample (count/N)."""
    uniq, cnt = np.unique(ds.bins, axis=0, return_counts=True)
    cells = {
        tuple(int(v) for v in row): int(c) / ds.N for row, c in zip(uniq, cnt)
    }
    return SampleCopulaDensity(cells, ds.m, ds.N)


def default_bin_count(N: int) -> int:
    """Square-root rule clamped to [2, 32], the CLI default."""
    return int(min(32, max(2, math.floor(math.sqrt(N)))))
