"""Gaussian simulation families with known mirrors and closed-form distances.

Two families over a planar parameter grid:

* ``MEAN_ONLY``: N(mu_x, 1) with mu_x = 0.1 ||x - (5.5, 5.5)||^2 on the
  integer grid of [1, 10]^2.  Equal variances make the Wasserstein
  1-distance |mu_x - mu_x'|, so the family admits an exact 1-d mirror
  equal to the mean function itself.
* ``MEAN_SD``: N(mu_x, sigma_x) with mu_x = 2 (0.1 + x1)^2 and
  sigma_x = 2 (0.1 + x2)^2 on a 10 x 10 grid of [0, 1]^2.  For univariate
  Gaussians the Wasserstein 2-distance is sqrt((mu - mu')^2 +
  (sigma - sigma')^2), giving an exact 2-d mirror (mu_x, sigma_x).

Sampling uses counter-based substreams keyed by (seed, grid index) and the
inverse normal CDF, so datasets are bit-identical for a given seed
regardless of generation order or platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from ._parallel import map_deterministic
from .core import Dataset, SampleSet
from .embedding import MirrorEmbedding, cmds, procrustes_align
from .errors import MirrorError
from .recovery import RecoveryResult, leave_one_out
from .surface import delaunay_triangulate, hull_boundary_distance, locate
from .transport import DistanceMatrix, distance_matrix

__all__ = [
    "FamilyVariant",
    "GaussianFamilySpec",
    "AlignedError",
    "mean_only_grid",
    "mean_sd_grid",
    "mean_only_mirror",
    "mean_sd_mirror",
    "gaussian_moments",
    "true_wasserstein",
    "true_distance_matrix",
    "generate",
    "aligned_mirror_error",
    "run_mirror_experiment",
    "run_recovery_experiment",
    "MirrorStudyResult",
    "RecoveryStudyResult",
]

MEAN_ONLY_CENTER = np.array([5.5, 5.5])


class FamilyVariant(str, Enum):
    MEAN_ONLY = "mean-only"
    MEAN_SD = "mean-sd"


def mean_only_grid() -> np.ndarray:
    """Integer grid of [1, 10]^2, 100 points."""
    axis = np.arange(1.0, 11.0)
    return np.array([[a, b] for a in axis for b in axis])


def mean_sd_grid() -> np.ndarray:
    """10 x 10 equally spaced grid of [0, 1]^2."""
    axis = np.linspace(0.0, 1.0, 10)
    return np.array([[a, b] for a in axis for b in axis])


@dataclass(frozen=True)
class GaussianFamilySpec:
    """One simulated family: variant, parameter grid, samples per set, seed."""

    variant: FamilyVariant
    grid: np.ndarray = None
    n: int = 100
    seed: int = 0

    def __post_init__(self):
        grid = self.grid
        if grid is None:
            grid = (
                mean_only_grid()
                if self.variant is FamilyVariant.MEAN_ONLY
                else mean_sd_grid()
            )
        grid = np.ascontiguousarray(grid, dtype=np.float64)
        if grid.ndim != 2 or grid.shape[1] != 2:
            raise MirrorError("grid must be an (m, 2) matrix")
        lo, hi = (
            (1.0, 10.0) if self.variant is FamilyVariant.MEAN_ONLY else (0.0, 1.0)
        )
        if grid.min() < lo or grid.max() > hi:
            raise MirrorError(
                f"{self.variant.value} grid must lie in [{lo}, {hi}]^2"
            )
        if self.n < 1:
            raise MirrorError("n must be at least 1")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def m(self) -> int:
        return self.grid.shape[0]


def mean_only_mirror(x: np.ndarray) -> np.ndarray:
    """Exact 1-d mirror of the mean-only family: 0.1 ||x - center||^2."""
    x = np.asarray(x, dtype=np.float64)
    diff = x - MEAN_ONLY_CENTER
    return 0.1 * np.sum(diff * diff, axis=-1)


def mean_sd_mirror(x: np.ndarray) -> np.ndarray:
    """Exact 2-d mirror of the mean-sd family: (mu_x, sigma_x)."""
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * (0.1 + x) ** 2


def gaussian_moments(variant: FamilyVariant, x: np.ndarray) -> tuple[float, float]:
    """(mean, standard deviation) of the family member at parameter x."""
    x = np.asarray(x, dtype=np.float64)
    if variant is FamilyVariant.MEAN_ONLY:
        return float(mean_only_mirror(x)), 1.0
    mu, sigma = mean_sd_mirror(x)
    return float(mu), float(sigma)


def true_wasserstein(variant: FamilyVariant, x: np.ndarray, x2: np.ndarray) -> float:
    """Closed-form population distance between two family members.

    Equal-variance Gaussians: W1 = |mu - mu'|.  General univariate
    Gaussians: W2 = sqrt((mu - mu')^2 + (sigma - sigma')^2).
    """
    mu_a, sd_a = gaussian_moments(variant, x)
    mu_b, sd_b = gaussian_moments(variant, x2)
    if variant is FamilyVariant.MEAN_ONLY:
        return abs(mu_a - mu_b)
    return float(np.hypot(mu_a - mu_b, sd_a - sd_b))


def true_distance_matrix(variant: FamilyVariant, grid: np.ndarray) -> DistanceMatrix:
    """Population distance matrix over a grid, from the closed forms."""
    grid = np.asarray(grid, dtype=np.float64)
    m = grid.shape[0]
    values = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            w = true_wasserstein(variant, grid[i], grid[j])
            values[i, j] = values[j, i] = w
    metric = "w1" if variant is FamilyVariant.MEAN_ONLY else "w2"
    return DistanceMatrix(
        ids=tuple(_set_id(i) for i in range(m)), values=values, metric=metric
    )


def _set_id(i: int) -> str:
    return f"set{i:03d}"


def _substream_normal(seed: int, index: int, n: int) -> np.ndarray:
    """n standard normal draws from the (seed, index) substream.

    Uniforms come from a keyed counter-based generator and are pushed
    through the inverse CDF, which is deterministic to the ulp across
    platforms (no rejection branches).
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    raw = gen.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    uniforms = (raw.astype(np.float64) + 0.5) * 2.0**-64
    return ndtri(uniforms)


def generate(spec: GaussianFamilySpec) -> Dataset:
    """Draw the labeled dataset for a family spec (q = 1, one set per grid point)."""

    def make(i: int) -> SampleSet:
        mu, sigma = gaussian_moments(spec.variant, spec.grid[i])
        z = _substream_normal(spec.seed, i, spec.n)
        return SampleSet(
            id=_set_id(i), samples=(mu + sigma * z)[:, None], params=spec.grid[i]
        )

    return Dataset(labeled=tuple(map_deterministic(make, list(range(spec.m)))))


@dataclass(frozen=True)
class AlignedError:
    """Per-point errors after removing the translation and rotation ambiguity."""

    rmse: float
    max_error: float
    aligned: np.ndarray = field(repr=False, compare=False)


def aligned_mirror_error(estimate: MirrorEmbedding, truth: np.ndarray) -> AlignedError:
    """Compare an embedding to known mirror values up to Euclidean isometry.

    Both configurations are centered, the estimate is rotated onto the truth
    by orthogonal alignment, and per-point Euclidean errors are summarized.
    The aligned estimate keeps the truth's original offset so it can be
    plotted against the true surface directly.
    """
    truth = np.asarray(truth, dtype=np.float64)
    if truth.ndim == 1:
        truth = truth[:, None]
    if truth.shape != estimate.coords.shape:
        raise MirrorError(
            f"truth shape {truth.shape} does not match embedding "
            f"{estimate.coords.shape}"
        )
    truth_center = truth.mean(axis=0)
    est_centered = estimate.coords - estimate.coords.mean(axis=0)
    fit = procrustes_align(est_centered, truth - truth_center)
    aligned = est_centered @ fit.rotation + truth_center
    per_point = np.linalg.norm(aligned - truth, axis=1)
    return AlignedError(
        rmse=float(np.sqrt(np.mean(per_point**2))),
        max_error=float(np.max(per_point)),
        aligned=aligned,
    )


@dataclass(frozen=True)
class MirrorStudyResult:
    """Error-curve rows plus one aligned surface per sample size."""

    grid: np.ndarray
    n_values: tuple[int, ...]
    seeds: tuple[int, ...]
    errors: np.ndarray  # (len(n_values), len(seeds)) aligned RMSE
    max_errors: np.ndarray
    surfaces: dict[int, np.ndarray]  # n -> (m,) aligned 1-d mirror (first seed)

    def median_rmse(self) -> np.ndarray:
        return np.median(self.errors, axis=1)


def run_mirror_experiment(
    n_values: Sequence[int] = (10, 50, 100, 500),
    seeds: Sequence[int] = tuple(range(10)),
    grid: np.ndarray | None = None,
) -> MirrorStudyResult:
    """Mean-only family: estimate the 1-d mirror for each n and seed.

    Pipeline per run: generate -> exact W1 distance matrix -> 1-d embedding
    -> isometry-aligned error against the known mirror on the grid.
    """
    spec0 = GaussianFamilySpec(variant=FamilyVariant.MEAN_ONLY, grid=grid)
    grid = spec0.grid
    truth = mean_only_mirror(grid)[:, None]
    errors = np.zeros((len(n_values), len(seeds)))
    max_errors = np.zeros_like(errors)
    surfaces: dict[int, np.ndarray] = {}
    for a, n in enumerate(n_values):
        for b, seed in enumerate(seeds):
            ds = generate(
                GaussianFamilySpec(
                    variant=FamilyVariant.MEAN_ONLY, grid=grid, n=n, seed=seed
                )
            )
            emb = cmds(distance_matrix(ds.labeled, p=1), c=1)
            err = aligned_mirror_error(emb, truth)
            errors[a, b] = err.rmse
            max_errors[a, b] = err.max_error
            if b == 0:
                surfaces[int(n)] = err.aligned[:, 0].copy()
    return MirrorStudyResult(
        grid=grid,
        n_values=tuple(int(n) for n in n_values),
        seeds=tuple(int(s) for s in seeds),
        errors=errors,
        max_errors=max_errors,
        surfaces=surfaces,
    )


@dataclass(frozen=True)
class RecoveryStudyResult:
    """Leave-one-out recovery scatter per sample size."""

    grid: np.ndarray
    n_values: tuple[int, ...]
    seed: int
    # n -> list of (x_true, RecoveryResult, truth_on_reduced_hull)
    runs: dict[int, list[tuple[np.ndarray, RecoveryResult, bool]]]

    def errors(self, n: int, interior_only: bool = False) -> np.ndarray:
        rows = self.runs[int(n)]
        return np.array(
            [
                np.linalg.norm(truth - rec.x_hat)
                for truth, rec, on_hull in rows
                if not (interior_only and on_hull)
            ]
        )

    def coordinate_errors(self, n: int, interior_only: bool = False) -> np.ndarray:
        rows = self.runs[int(n)]
        return np.array(
            [
                np.abs(truth - rec.x_hat)
                for truth, rec, on_hull in rows
                if not (interior_only and on_hull)
            ]
        )


def _truth_on_reduced_hull(grid: np.ndarray, i: int) -> bool:
    """Does point i's truth sit on (or outside) the hull of the other points?

    Deleted hull vertices cannot be recovered exactly: their truth lies
    outside the reduced hull, and edge points sit exactly on it.
    """
    rest = np.delete(grid, i, axis=0)
    tri = delaunay_triangulate(rest)
    if locate(tri, grid[i]) is None:
        return True
    scale = float(np.max(rest.max(axis=0) - rest.min(axis=0)))
    return hull_boundary_distance(tri, grid[i]) <= 1e-9 * scale


def run_recovery_experiment(
    n_values: Sequence[int] = (10, 100, 1000, 10000),
    seed: int = 0,
    grid: np.ndarray | None = None,
) -> RecoveryStudyResult:
    """Mean-sd family: leave-one-out parameter recovery for each n.

    Pipeline per n: generate -> leave-one-out with exact W2 distances and a
    2-d mirror -> per-point recovery errors, with hull-boundary truths
    flagged rather than dropped.
    """
    spec0 = GaussianFamilySpec(variant=FamilyVariant.MEAN_SD, grid=grid)
    grid = spec0.grid
    hull_flags = [_truth_on_reduced_hull(grid, i) for i in range(len(grid))]
    runs: dict[int, list[tuple[np.ndarray, RecoveryResult, bool]]] = {}
    for n in n_values:
        ds = generate(
            GaussianFamilySpec(variant=FamilyVariant.MEAN_SD, grid=grid, n=n, seed=seed)
        )
        results = leave_one_out(ds, p=2, c=2)
        runs[int(n)] = [
            (truth, rec, hull_flags[i]) for i, (truth, rec) in enumerate(results)
        ]
    return RecoveryStudyResult(
        grid=grid,
        n_values=tuple(int(n) for n in n_values),
        seed=int(seed),
        runs=runs,
    )
