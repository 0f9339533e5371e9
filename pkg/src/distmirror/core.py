"""Domain types, dataset validation, and ingestion of sample files.

A dataset is a collection of sample sets.  Each set holds ``n`` observation
vectors in R^q drawn from one distribution; a set is *labeled* when the
generating parameter vector in R^d is known and *unlabeled* otherwise.

On-disk formats
---------------
NDJSON: one record per line,
``{"id": str, "params": [float, ...] | absent, "samples": [[float, ...], ...]}``.
A missing ``params`` field (not an empty list) marks the set unlabeled.

CSV: header ``id, p1..pd, s1..sq``; one row per observation, rows grouped
by id; empty parameter cells mark the set unlabeled.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DatasetError, DuplicateParameters, UnequalSampleSizes

__all__ = [
    "SampleSet",
    "Dataset",
    "load_dataset",
    "save_dataset",
    "validate_equal_sample_size",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleSet:
    """One distribution's evidence: ``n`` embedded observations, optional label.

    ``samples`` is an (n, q) matrix whose rows are iid observations in the
    embedding space; ``params`` is the generating parameter vector, or None
    for an unlabeled set.  Arrays are made read-only so instances can be
    shared freely across threads.
    """

    id: str
    samples: np.ndarray
    params: np.ndarray | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise DatasetError(
                f"set {self.id!r}: samples must be a non-empty 2-d matrix, "
                f"got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise DatasetError(f"set {self.id!r}: samples contain non-finite values")
        object.__setattr__(self, "samples", _freeze(samples))
        if self.params is not None:
            params = np.atleast_1d(np.asarray(self.params, dtype=np.float64))
            if params.ndim != 1 or params.size < 1:
                raise DatasetError(
                    f"set {self.id!r}: params must be a non-empty vector"
                )
            if not np.all(np.isfinite(params)):
                raise DatasetError(f"set {self.id!r}: params contain non-finite values")
            object.__setattr__(self, "params", _freeze(params))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def q(self) -> int:
        return self.samples.shape[1]

    @property
    def labeled(self) -> bool:
        return self.params is not None


@dataclass(frozen=True)
class Dataset:
    """Labeled and unlabeled sample sets sharing one embedding space.

    Invariants checked eagerly at construction: a common sample dimension q
    across every set, a common parameter dimension d across labeled sets,
    and pairwise distinct labeled parameter vectors.
    """

    labeled: tuple[SampleSet, ...]
    unlabeled: tuple[SampleSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "labeled", tuple(self.labeled))
        object.__setattr__(self, "unlabeled", tuple(self.unlabeled))
        sets = self.labeled + self.unlabeled
        if not sets:
            raise DatasetError("dataset contains no sample sets")
        if any(s.params is None for s in self.labeled):
            raise DatasetError("labeled sets must carry parameter vectors")
        if any(s.params is not None for s in self.unlabeled):
            raise DatasetError("unlabeled sets must not carry parameter vectors")
        q = sets[0].q
        for s in sets:
            if s.q != q:
                raise DatasetError(
                    f"inconsistent sample dimension: set {s.id!r} has q={s.q}, "
                    f"expected q={q}"
                )
        if self.labeled:
            d = self.labeled[0].params.size
            for s in self.labeled:
                if s.params.size != d:
                    raise DatasetError(
                        f"inconsistent parameter dimension: set {s.id!r} has "
                        f"d={s.params.size}, expected d={d}"
                    )
            for i, a in enumerate(self.labeled):
                for b in self.labeled[i + 1 :]:
                    if np.array_equal(a.params, b.params):
                        raise DuplicateParameters(
                            f"sets {a.id!r} and {b.id!r} share parameters "
                            f"{a.params.tolist()}"
                        )

    @property
    def m(self) -> int:
        return len(self.labeled)

    @property
    def d(self) -> int:
        if not self.labeled:
            raise DatasetError("dataset has no labeled sets; d is undefined")
        return self.labeled[0].params.size

    @property
    def q(self) -> int:
        return (self.labeled + self.unlabeled)[0].q

    @property
    def all_sets(self) -> tuple[SampleSet, ...]:
        return self.labeled + self.unlabeled

    def params_matrix(self) -> np.ndarray:
        """Stack labeled parameter vectors into an (m, d) matrix."""
        return np.array([s.params for s in self.labeled], dtype=np.float64)


def validate_equal_sample_size(ds: Dataset) -> int:
    """Return the common n, or raise :class:`UnequalSampleSizes`.

    The exact permutation coupling behind the transport solver requires
    every set (labeled and unlabeled) to hold the same number of rows.
    """
    sets = ds.all_sets
    n = sets[0].n
    offenders = [(s.id, s.n) for s in sets if s.n != n]
    if offenders:
        bad = [(sets[0].id, n)] + offenders
        raise UnequalSampleSizes([i for i, _ in bad], [k for _, k in bad])
    return n


def _finite_or_raise(values, where: str):
    for v in values:
        if not math.isfinite(v):
            raise DatasetError(f"{where}: non-finite value {v!r}")


def _build_dataset(records: Iterable[tuple[str, list[float] | None, list[list[float]]]]) -> Dataset:
    labeled: list[SampleSet] = []
    unlabeled: list[SampleSet] = []
    for set_id, params, rows in records:
        s = SampleSet(id=set_id, samples=np.array(rows, dtype=np.float64),
                      params=None if params is None else np.array(params))
        (labeled if s.labeled else unlabeled).append(s)
    return Dataset(labeled=tuple(labeled), unlabeled=tuple(unlabeled))


def _load_ndjson(path: Path) -> Dataset:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}: line {lineno}: invalid JSON ({e.msg})") from e
            if not isinstance(rec, dict) or "id" not in rec or "samples" not in rec:
                raise DatasetError(
                    f"{path}: line {lineno}: record must contain 'id' and 'samples'"
                )
            samples = rec["samples"]
            if (not isinstance(samples, list) or not samples
                    or not all(isinstance(r, list) and r for r in samples)):
                raise DatasetError(
                    f"{path}: line {lineno}: 'samples' must be a non-empty list of rows"
                )
            width = len(samples[0])
            if any(len(r) != width for r in samples):
                raise DatasetError(
                    f"{path}: line {lineno}: ragged sample rows in set {rec['id']!r}"
                )
            params = rec.get("params")
            try:
                _finite_or_raise((float(v) for r in samples for v in r),
                                 f"{path}: line {lineno}")
                if params is not None:
                    _finite_or_raise((float(v) for v in params),
                                     f"{path}: line {lineno}")
            except (TypeError, ValueError) as e:
                raise DatasetError(f"{path}: line {lineno}: non-numeric entry") from e
            records.append((str(rec["id"]), params, samples))
    if not records:
        raise DatasetError(f"{path}: file contains no records")
    return _build_dataset(records)


def _load_csv(path: Path) -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "id":
            raise DatasetError(f"{path}: line 1: header must start with 'id'")
        p_cols = [i for i, h in enumerate(header) if h.startswith("p") and h[1:].isdigit()]
        s_cols = [i for i, h in enumerate(header) if h.startswith("s") and h[1:].isdigit()]
        if not s_cols:
            raise DatasetError(f"{path}: line 1: no sample columns s1..sq found")

        order: list[str] = []
        rows_by_id: dict[str, list[list[float]]] = {}
        params_by_id: dict[str, list[float] | None] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: line {lineno}: expected {len(header)} cells, got {len(row)}"
                )
            set_id = row[0]
            raw_params = [row[i].strip() for i in p_cols]
            if all(c == "" for c in raw_params):
                params = None
            elif any(c == "" for c in raw_params):
                raise DatasetError(
                    f"{path}: line {lineno}: partially empty parameter cells"
                )
            else:
                try:
                    params = [float(c) for c in raw_params]
                except ValueError:
                    raise DatasetError(
                        f"{path}: line {lineno}: non-numeric parameter cell"
                    ) from None
                _finite_or_raise(params, f"{path}: line {lineno}")
            try:
                sample = [float(row[i]) for i in s_cols]
            except ValueError:
                raise DatasetError(f"{path}: line {lineno}: non-numeric sample cell") from None
            _finite_or_raise(sample, f"{path}: line {lineno}")

            if set_id not in rows_by_id:
                order.append(set_id)
                rows_by_id[set_id] = []
                params_by_id[set_id] = params
            else:
                prev = params_by_id[set_id]
                same = (prev is None and params is None) or (
                    prev is not None and params is not None and prev == params
                )
                if not same:
                    raise DatasetError(
                        f"{path}: line {lineno}: set {set_id!r} changes parameters mid-file"
                    )
            rows_by_id[set_id].append(sample)
    if not order:
        raise DatasetError(f"{path}: file contains no records")
    return _build_dataset((i, params_by_id[i], rows_by_id[i]) for i in order)


def load_dataset(path: str | Path, format: str = "ndjson") -> Dataset:
    """Load a dataset file, validating all invariants eagerly.

    ``format`` is ``"ndjson"`` or ``"csv"``; parse errors carry the line
    number.  Downstream code never sees a dataset violating its invariants.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"no such file: {path}")
    if format == "ndjson":
        return _load_ndjson(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format {format!r} (expected 'ndjson' or 'csv')")


def save_dataset(ds: Dataset, path: str | Path, format: str = "ndjson") -> None:
    """Serialize a dataset so that reloading reproduces it field-for-field."""
    path = Path(path)
    sets = ds.all_sets
    if format == "ndjson":
        with open(path, "w", encoding="utf-8") as fh:
            for s in sets:
                rec: dict = {"id": s.id}
                if s.params is not None:
                    rec["params"] = s.params.tolist()
                rec["samples"] = s.samples.tolist()
                fh.write(json.dumps(rec) + "\n")
        return
    if format == "csv":
        d = max((s.params.size for s in sets if s.params is not None), default=0)
        q = sets[0].q
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["id"] + [f"p{k + 1}" for k in range(d)] + [f"s{k + 1}" for k in range(q)]
            )
            for s in sets:
                pcells = (
                    [repr(float(v)) for v in s.params] if s.params is not None else [""] * d
                )
                for row in s.samples:
                    writer.writerow([s.id] + pcells + [repr(float(v)) for v in row])
        return
    raise ValueError(f"unknown format {format!r} (expected 'ndjson' or 'csv')")
