"""Classical multidimensional scaling of a distance matrix.

The doubly centered matrix B = -1/2 H D^(.2) H (entrywise square, H the
centering matrix) is a Gram matrix exactly when the distances are Euclidean;
its eigendecomposition yields coordinates whose pairwise distances reproduce
the input.  Negative eigenvalues measure the departure from Euclideanness:
they are clipped to zero in the coordinates but preserved in the reported
spectrum, which also drives scree-style dimension selection.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MirrorError, NoPositiveSpectrum
from .transport import DistanceMatrix

__all__ = [
    "MirrorEmbedding",
    "ProcrustesAlignment",
    "RealizabilityReport",
    "double_center",
    "cmds",
    "realizability_diagnostics",
    "select_dimension",
    "procrustes_align",
    "write_embedding",
    "read_embedding",
    "write_spectrum",
]


@dataclass(frozen=True)
class MirrorEmbedding:
    """Coordinates of m points in R^c plus the full spectrum of B.

    Row i is the mirror estimate for set ``ids[i]``.  Columns are mutually
    orthogonal, column-mean-zero, and column j has squared norm equal to
    max(spectrum[j], 0).
    """

    ids: tuple[str, ...]
    coords: np.ndarray
    spectrum: np.ndarray
    c: int

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        spectrum = np.ascontiguousarray(self.spectrum, dtype=np.float64)
        m = len(self.ids)
        if coords.shape != (m, self.c):
            raise MirrorError(
                f"embedding coords shape {coords.shape} does not match "
                f"({m}, {self.c})"
            )
        if spectrum.shape != (m,):
            raise MirrorError("spectrum must contain one eigenvalue per point")
        coords.setflags(write=False)
        spectrum.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "spectrum", spectrum)

    @property
    def m(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class ProcrustesAlignment:
    """Orthogonal matrix minimizing ||reference - estimate @ rotation||_F."""

    rotation: np.ndarray
    residual: float


@dataclass(frozen=True)
class RealizabilityReport:
    """Scree diagnostics of a distance matrix's doubly centered spectrum.

    ``eigenvalue_share[j]`` is spectrum[j] / m, the per-dimension growth rate
    a user can threshold to judge whether dimension j+1 carries signal.
    """

    spectrum: np.ndarray
    count_negative: int
    min_eigenvalue: float
    eigenvalue_share: np.ndarray


def double_center(delta: DistanceMatrix) -> np.ndarray:
    """Return B = -1/2 H D^(.2) H, exactly symmetric with zero row sums."""
    d2 = delta.values**2
    row = d2.mean(axis=1, keepdims=True)
    col = d2.mean(axis=0, keepdims=True)
    grand = d2.mean()
    b = -0.5 * (d2 - row - col + grand)
    return (b + b.T) / 2.0


def _sorted_eig(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        evals, evecs = np.linalg.eigh(b)
    except np.linalg.LinAlgError as e:
        raise MirrorError(f"eigendecomposition failed: {e}") from e
    order = np.argsort(evals, kind="stable")[::-1]
    return evals[order], evecs[:, order]


def cmds(delta: DistanceMatrix, c: int) -> MirrorEmbedding:
    """Classical MDS of a distance matrix into R^c.

    Coordinates are eigenvectors of the doubly centered matrix scaled by the
    square roots of the top c eigenvalues (by algebraic value); negative
    eigenvalues among the top c yield zero columns.  Each column's sign is
    flipped so its entry of largest magnitude is positive, making output
    reproducible across platforms.
    """
    m = delta.m
    if not 1 <= c <= m:
        raise MirrorError(f"embedding dimension c={c} must satisfy 1 <= c <= m={m}")
    evals, evecs = _sorted_eig(double_center(delta))
    scale = np.sqrt(np.maximum(evals[:c], 0.0))
    coords = evecs[:, :c] * scale
    for j in range(c):
        col = coords[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            coords[:, j] = -col
    return MirrorEmbedding(ids=delta.ids, coords=coords, spectrum=evals, c=c)


def realizability_diagnostics(delta: DistanceMatrix) -> RealizabilityReport:
    """Spectrum-based check of how Euclidean a distance matrix is.

    An exactly Euclidean matrix has a positive semidefinite B, so any
    eigenvalue below -tol (tol = 1e-9 * max|eigenvalue|) counts against
    realizability.
    """
    evals, _ = _sorted_eig(double_center(delta))
    peak = float(np.max(np.abs(evals))) if evals.size else 0.0
    tol = 1e-9 * peak
    return RealizabilityReport(
        spectrum=evals,
        count_negative=int(np.sum(evals < -tol)),
        min_eigenvalue=float(evals[-1]) if evals.size else 0.0,
        eigenvalue_share=evals / delta.m,
    )


def select_dimension(spectrum: np.ndarray) -> int:
    """Pick the embedding dimension by the largest gap in the scree.

    Returns argmax over j in {1..m-1} of spectrum[j-1] - spectrum[j],
    restricted to positive spectrum[j-1]; ties break toward smaller
    dimension.  Scale-invariant by construction.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1 or spectrum.size < 2:
        raise MirrorError("spectrum must be a vector of length >= 2")
    if np.any(np.diff(spectrum) > 0):
        raise MirrorError("spectrum must be sorted in descending order")
    if not np.any(spectrum > 0):
        raise NoPositiveSpectrum("no positive eigenvalue; nothing to embed")
    gaps = spectrum[:-1] - spectrum[1:]
    gaps = np.where(spectrum[:-1] > 0, gaps, -np.inf)
    return int(np.argmax(gaps)) + 1


def procrustes_align(estimate: np.ndarray, reference: np.ndarray) -> ProcrustesAlignment:
    """Best orthogonal alignment of one centered configuration onto another.

    Both inputs are column-mean-centered first (matching CMDS output
    conventions); the rotation comes from the SVD of estimate^T reference
    and may include a reflection.
    """
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape or estimate.ndim != 2:
        raise MirrorError(
            f"shape mismatch: estimate {estimate.shape} vs reference {reference.shape}"
        )
    est = estimate - estimate.mean(axis=0)
    ref = reference - reference.mean(axis=0)
    u, _, vt = np.linalg.svd(est.T @ ref)
    rotation = u @ vt
    residual = float(np.linalg.norm(ref - est @ rotation))
    return ProcrustesAlignment(rotation=rotation, residual=residual)


def write_embedding(emb: MirrorEmbedding, path: str | Path, header_note: str | None = None) -> None:
    """Write embedding CSV ``id, y1..yc``; an optional note rides as a comment."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"y{j + 1}" for j in range(emb.c)])
        for i, set_id in enumerate(emb.ids):
            writer.writerow([set_id] + [repr(float(v)) for v in emb.coords[i]])


def read_embedding(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read an embedding CSV back into (ids, coords)."""
    path = Path(path)
    if not path.exists():
        raise MirrorError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise MirrorError(f"{path}: no embedding rows")
    ids = tuple(r[0] for r in rows[1:])
    try:
        coords = np.array([[float(c) for c in r[1:]] for r in rows[1:]], dtype=np.float64)
    except ValueError:
        raise MirrorError(f"{path}: non-numeric coordinate") from None
    return ids, coords


def write_spectrum(spectrum: np.ndarray, path: str | Path) -> None:
    """Write the eigenvalue spectrum as a single-column CSV for scree plots."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("eigenvalue\n")
        for v in np.asarray(spectrum, dtype=np.float64):
            fh.write(repr(float(v)) + "\n")
