"""Exact Wasserstein p-distances between equal-size sample sets.

For two empirical measures with the same number n of atoms, the Wasserstein
p-distance reduces to a minimum over permutation couplings,

    W_p = min_pi ( (1/n) sum_i ||a_i - b_{pi(i)}||^p )^(1/p),

which is solved exactly: by pairing order statistics when q = 1 (optimal
for every p >= 1 in one dimension), and by linear sum assignment on the
dense cost matrix otherwise.  Entropic or other approximate solvers are
deliberately absent; all downstream tolerances assume exact costs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ._parallel import map_deterministic
from .core import SampleSet
from .errors import MirrorError, UnequalSampleSizes

__all__ = [
    "TransportPlan",
    "DistanceMatrix",
    "cost_matrix",
    "wasserstein_exact",
    "distance_matrix",
    "read_distance_matrix",
    "write_distance_matrix",
]

#: Largest asymmetry tolerated when reading an external distance matrix.
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    """An optimal permutation coupling and its attained cost.

    ``permutation[i] = j`` pairs row i of the first set with row j of the
    second.  Only the cost is contractually deterministic; ties between
    equal-cost assignments are resolved arbitrarily by the solver.
    """

    permutation: np.ndarray
    cost: float


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix of pairwise empirical dissimilarities."""

    ids: tuple[str, ...]
    values: np.ndarray
    metric: str

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        m = len(self.ids)
        if values.shape != (m, m):
            raise MirrorError(
                f"distance matrix shape {values.shape} does not match {m} ids"
            )
        if not np.all(np.isfinite(values)):
            raise MirrorError("distance matrix contains non-finite entries")
        if np.any(values < 0):
            raise MirrorError("distance matrix contains negative entries")
        if not np.array_equal(values, values.T):
            raise MirrorError("distance matrix is not exactly symmetric")
        if np.any(np.diagonal(values) != 0):
            raise MirrorError("distance matrix has a nonzero diagonal")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.ids)


def _check_pair(a: SampleSet, b: SampleSet) -> None:
    if a.q != b.q:
        raise MirrorError(
            f"sample dimension mismatch: {a.id!r} has q={a.q}, {b.id!r} has q={b.q}"
        )
    if a.n != b.n:
        raise UnequalSampleSizes([a.id, b.id], [a.n, b.n])


def cost_matrix(a: SampleSet, b: SampleSet, p: float) -> np.ndarray:
    """Dense matrix of per-pair costs ||a_i - b_j||^p (Euclidean norm)."""
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    _check_pair(a, b)
    if p == 2:
        return cdist(a.samples, b.samples, "sqeuclidean")
    d = cdist(a.samples, b.samples, "euclidean")
    return d if p == 1 else d**p


def _sorted_pair_cost(sa: np.ndarray, sb: np.ndarray, p: float) -> float:
    """Cost of pairing pre-sorted 1-d samples in order."""
    gaps = np.abs(sa - sb)
    if p == 1:
        return float(np.mean(gaps))
    if p == 2:
        return float(np.sqrt(np.mean(gaps * gaps)))
    return float(np.mean(gaps**p) ** (1.0 / p))


def wasserstein_exact(a: SampleSet, b: SampleSet, p: float = 1) -> TransportPlan:
    """Globally minimal permutation coupling between two equal-size sets.

    q = 1 takes the sorting fast path; otherwise an exact linear-assignment
    solve on the cost matrix.  Costs for p = 2 are minimized on squared
    distances and rooted once at the end.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    _check_pair(a, b)
    n = a.n
    if a.q == 1:
        xa = a.samples[:, 0]
        xb = b.samples[:, 0]
        order_a = np.argsort(xa, kind="stable")
        order_b = np.argsort(xb, kind="stable")
        perm = np.empty(n, dtype=np.intp)
        perm[order_a] = order_b
        cost = _sorted_pair_cost(xa[order_a], xb[order_b], p)
        return TransportPlan(permutation=perm, cost=cost)
    costs = cost_matrix(a, b, p)
    rows, cols = linear_sum_assignment(costs)
    perm = np.empty(n, dtype=np.intp)
    perm[rows] = cols
    total = float(costs[rows, cols].mean())
    return TransportPlan(permutation=perm, cost=float(total ** (1.0 / p)))


def distance_matrix(sets: Sequence[SampleSet], p: float = 1) -> DistanceMatrix:
    """Pairwise exact Wasserstein p-distances for a list of sample sets.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric.  Pairs are evaluated in parallel when allowed; the
    result is identical for any worker count.
    """
    sets = list(sets)
    if not sets:
        raise MirrorError("distance_matrix requires at least one sample set")
    for s in sets[1:]:
        _check_pair(sets[0], s)
    m = len(sets)
    values = np.zeros((m, m), dtype=np.float64)
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]

    if m > 1 and sets[0].q == 1:
        sorted_1d = [np.sort(s.samples[:, 0]) for s in sets]

        def pair_cost(ij: tuple[int, int]) -> float:
            i, j = ij
            return _sorted_pair_cost(sorted_1d[i], sorted_1d[j], p)

    else:

        def pair_cost(ij: tuple[int, int]) -> float:
            i, j = ij
            return wasserstein_exact(sets[i], sets[j], p).cost

    for (i, j), cost in zip(pairs, map_deterministic(pair_cost, pairs)):
        values[i, j] = cost
        values[j, i] = cost
    return DistanceMatrix(
        ids=tuple(s.id for s in sets), values=values, metric=f"w{p:g}"
    )


def write_distance_matrix(dm: DistanceMatrix, path: str | Path) -> None:
    """Write a distance matrix CSV: an id row, then m numeric rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dm.ids)
        for row in dm.values:
            writer.writerow([repr(float(v)) for v in row])


def read_distance_matrix(path: str | Path) -> DistanceMatrix:
    """Read a distance matrix CSV, symmetrizing tiny asymmetries by averaging."""
    path = Path(path)
    if not path.exists():
        raise MirrorError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise MirrorError(f"{path}: empty distance matrix file")
    ids = tuple(c.strip() for c in rows[0])
    m = len(ids)
    if len(rows) != m + 1:
        raise MirrorError(f"{path}: expected {m} value rows, found {len(rows) - 1}")
    try:
        values = np.array([[float(c) for c in row] for row in rows[1:]], dtype=np.float64)
    except ValueError:
        raise MirrorError(f"{path}: non-numeric matrix entry") from None
    if values.shape != (m, m):
        raise MirrorError(f"{path}: matrix shape {values.shape} does not match ids")
    asym = float(np.max(np.abs(values - values.T))) if m else 0.0
    if asym > SYMMETRY_TOL:
        raise MirrorError(
            f"{path}: matrix asymmetric beyond tolerance ({asym:.3e} > {SYMMETRY_TOL:.0e})"
        )
    diag = float(np.max(np.abs(np.diagonal(values))))
    if diag > SYMMETRY_TOL:
        raise MirrorError(f"{path}: nonzero diagonal entry ({diag:.3e})")
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(ids=ids, values=values, metric="external")
