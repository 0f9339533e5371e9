"""Command-line front end: ingest, distances, embedding, surface, recovery.

Subcommands compose through CSV files so every figure-ready artifact can be
regenerated and diffed; all outputs are byte-identical given the same
inputs, flags, and seed.  Exit codes: 0 success, 1 runtime or data error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import load_dataset, validate_equal_sample_size
from .embedding import (
    cmds,
    realizability_diagnostics,
    select_dimension,
    write_embedding,
    write_spectrum,
    read_embedding,
)
from .errors import MirrorError
from .recovery import joint_embed, leave_one_out, recover_parameter, write_recovery_report
from .sim import (
    FamilyVariant,
    run_mirror_experiment,
    run_recovery_experiment,
)
from .surface import (
    BSplineConfig,
    MirrorSurface,
    delaunay_triangulate,
    evaluate_bspline,
    fit_axis_scaling,
    fit_bspline,
    interpolate,
    write_triangulation,
)
from .transport import distance_matrix, read_distance_matrix, write_distance_matrix

_METRIC_ORDER = {"w1": 1.0, "w2": 2.0}


class _UsageError(Exception):
    """Raised for option combinations argparse cannot express."""


def _metric_p(metric: str) -> float:
    if metric not in _METRIC_ORDER:
        raise _UsageError(
            f"metric {metric!r} cannot be computed from samples; use w1 or w2"
        )
    return _METRIC_ORDER[metric]


def read_params_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a parameter table CSV with header ``id, p1..pd``."""
    path = Path(path)
    if not path.exists():
        raise MirrorError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise MirrorError(f"{path}: no parameter rows")
    ids = tuple(r[0] for r in rows[1:])
    try:
        params = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    except ValueError:
        raise MirrorError(f"{path}: non-numeric parameter") from None
    return ids, params


def write_params_csv(ids, params: np.ndarray, path: str | Path) -> None:
    params = np.asarray(params, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"p{k + 1}" for k in range(params.shape[1])])
        for set_id, row in zip(ids, params):
            writer.writerow([set_id] + [repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_distmat(args) -> int:
    p = _metric_p(args.metric)
    t0 = time.perf_counter()
    ds = load_dataset(args.input, args.format)
    n = validate_equal_sample_size(ds)
    dm = distance_matrix(list(ds.all_sets), p)
    write_distance_matrix(dm, args.output)
    elapsed = time.perf_counter() - t0
    print(
        f"distmat: m={dm.m} n={n} q={ds.q} metric={args.metric} "
        f"wall={elapsed:.3f}s -> {args.output}"
    )
    return 0


def _resolve_dim(dim: str, spectrum: np.ndarray) -> tuple[int, bool]:
    if dim == "auto":
        return select_dimension(spectrum), True
    try:
        value = int(dim)
    except ValueError:
        raise _UsageError(f"--dim must be an integer or 'auto', got {dim!r}") from None
    if value < 1:
        raise _UsageError("--dim must be >= 1")
    return value, False


def _spectrum_path(args, default_stem: Path) -> Path:
    if args.spectrum:
        return Path(args.spectrum)
    return default_stem.with_suffix(".spectrum.csv")


def _cmd_embed(args) -> int:
    dm = read_distance_matrix(args.input)
    report = realizability_diagnostics(dm)
    c, auto = _resolve_dim(args.dim, report.spectrum)
    emb = cmds(dm, c)
    note = f"dim={c} (auto)" if auto else f"dim={c}"
    write_embedding(emb, args.output, header_note=note)
    write_spectrum(report.spectrum, _spectrum_path(args, Path(args.output)))
    print(f"embed: m={emb.m} {note} -> {args.output}")
    return 0


def _cmd_diagnose(args) -> int:
    dm = read_distance_matrix(args.input)
    report = realizability_diagnostics(dm)
    spectrum = report.spectrum
    print(f"diagnose: m={dm.m}")
    print(f"  negative eigenvalues (beyond tolerance): {report.count_negative}")
    print(f"  min eigenvalue: {report.min_eigenvalue:.6e}")
    head = ", ".join(f"{v:.6g}" for v in spectrum[: min(10, len(spectrum))])
    print(f"  leading eigenvalues: {head}")
    shares = ", ".join(f"{v:.6g}" for v in report.eigenvalue_share[: min(10, len(spectrum))])
    print(f"  eigenvalue/m shares: {shares}")
    if args.output:
        write_spectrum(spectrum, args.output)
        print(f"  spectrum -> {args.output}")
    return 0


def _cmd_fit(args) -> int:
    ids_emb, coords = read_embedding(args.embedding)
    ids_par, params = read_params_csv(args.params)
    by_id = {i: k for k, i in enumerate(ids_par)}
    missing = [i for i in ids_emb if i not in by_id]
    if missing:
        raise MirrorError(f"params file lacks ids: {missing[:5]}")
    params = params[[by_id[i] for i in ids_emb]]

    scaling = fit_axis_scaling(params) if args.normalize_params else None
    work = scaling.transform(params) if scaling else params

    lo = params.min(axis=0)
    hi = params.max(axis=0)
    res = args.grid_res
    d = params.shape[1]
    if d == 1:
        grid = np.linspace(lo[0], hi[0], res)[:, None]
    elif d == 2:
        ax0 = np.linspace(lo[0], hi[0], res)
        ax1 = np.linspace(lo[1], hi[1], res)
        grid = np.array([[a, b] for a in ax0 for b in ax1])
    else:
        raise MirrorError(f"surface fitting supports d in {{1, 2}}, got d={d}")

    if args.method == "delaunay":
        tri = delaunay_triangulate(work)
        surf = MirrorSurface(tri, coords)
        evaluate = lambda x: interpolate(surf, x)  # noqa: E731
        if args.triangulation:
            write_triangulation(tri, args.triangulation)
    else:
        if d != 2:
            raise MirrorError("bspline fitting requires d=2")
        config = BSplineConfig(
            degree=args.degree, interior_knots=args.knots, penalty=args.penalty
        )
        bsurf = fit_bspline(work, coords, config)
        evaluate = lambda x: evaluate_bspline(bsurf, x)  # noqa: E731

    kept = 0
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        if scaling:
            fh.write(
                "# normalized axes: offset="
                + ",".join(repr(float(v)) for v in scaling.offset)
                + " scale="
                + ",".join(repr(float(v)) for v in scaling.scale)
                + "\n"
            )
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(d)] + [f"y{k + 1}" for k in range(coords.shape[1])])
        for x in grid:
            value = evaluate(scaling.transform(x) if scaling else x)
            if value is None:
                continue
            kept += 1
            writer.writerow(
                [repr(float(v)) for v in x] + [repr(float(v)) for v in np.atleast_1d(value)]
            )
    print(f"fit: method={args.method} grid={res} rows={kept} -> {args.output}")
    return 0


def _cmd_recover(args) -> int:
    p = _metric_p(args.metric)
    ds = load_dataset(args.input, args.format)
    validate_equal_sample_size(ds)
    if not ds.labeled:
        raise MirrorError("recovery requires labeled sets")
    d = ds.d
    params = ds.params_matrix()
    scaling = fit_axis_scaling(params) if args.normalize_params else None
    work = scaling.transform(params) if scaling else params

    if args.dim is None:
        c, note = d, f"dim={d} (default d)"
    else:
        spectrum = realizability_diagnostics(distance_matrix(list(ds.labeled), p)).spectrum
        c, auto = _resolve_dim(args.dim, spectrum)
        note = f"dim={c} (auto)" if auto else f"dim={c}"

    results: list[tuple[np.ndarray | None, object]] = []
    ids: list[str] = []
    if args.leave_one_out:
        loo = leave_one_out(ds, p, c, params=work if scaling else None)
        for i, (_, rec) in enumerate(loo):
            if scaling:
                rec = _unscale_result(rec, scaling)
            results.append((ds.labeled[i].params, rec))
        ids = [s.id for s in ds.labeled]
    else:
        if not ds.unlabeled:
            raise _UsageError("no unlabeled sets in input; nothing to recover")
        for u in ds.unlabeled:
            psi = joint_embed(list(ds.labeled), u, p, c)
            rec = recover_parameter(psi, work)
            if scaling:
                rec = _unscale_result(rec, scaling)
            results.append((None, rec))
            ids.append(u.id)
    write_recovery_report(results, ids, args.output)
    print(f"recover: {note} sets={len(results)} -> {args.output}")
    return 0


def _unscale_result(rec, scaling):
    from dataclasses import replace

    return replace(rec, x_hat=scaling.inverse(rec.x_hat))


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise _UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _cmd_simulate(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    variant = FamilyVariant(args.experiment)
    manifest = [
        f"distmirror {__version__}",
        f"experiment: {variant.value}",
    ]
    if variant is FamilyVariant.MEAN_ONLY:
        n_values = _parse_int_list(args.n_values) if args.n_values else (10, 50, 100, 500)
        seeds = _parse_int_list(args.seeds) if args.seeds else tuple(range(10))
        study = run_mirror_experiment(n_values=n_values, seeds=seeds)
        for n in study.n_values:
            path = out / f"mirror_surface_n{n}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["x1", "x2", "mirror"])
                for x, v in zip(study.grid, study.surfaces[n]):
                    writer.writerow([repr(float(x[0])), repr(float(x[1])), repr(float(v))])
        curve = out / "mirror_error_curve.csv"
        with open(curve, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "seed", "rmse", "max_error"])
            for a, n in enumerate(study.n_values):
                for b, seed in enumerate(study.seeds):
                    writer.writerow(
                        [n, seed, repr(float(study.errors[a, b])), repr(float(study.max_errors[a, b]))]
                    )
        manifest += [
            f"m: {len(study.grid)}",
            f"n_values: {','.join(str(v) for v in study.n_values)}",
            f"seeds: {','.join(str(s) for s in study.seeds)}",
            "outputs: mirror_surface_n<n>.csv, mirror_error_curve.csv",
        ]
    else:
        n_values = _parse_int_list(args.n_values) if args.n_values else (10, 100, 1000, 10000)
        seed = args.seed if args.seed is not None else 0
        study = run_recovery_experiment(n_values=n_values, seed=seed)
        for n in study.n_values:
            path = out / f"recovery_scatter_n{n}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(
                    ["x1_true", "x2_true", "x1_hat", "x2_hat", "residual", "truth_on_boundary"]
                )
                for truth, rec, on_hull in study.runs[n]:
                    writer.writerow(
                        [repr(float(truth[0])), repr(float(truth[1]))]
                        + [repr(float(v)) for v in rec.x_hat]
                        + [repr(rec.residual), str(on_hull).lower()]
                    )
        manifest += [
            f"m: {len(study.grid)}",
            f"n_values: {','.join(str(v) for v in study.n_values)}",
            f"seed: {study.seed}",
            "outputs: recovery_scatter_n<n>.csv",
        ]
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    print(f"simulate: {variant.value} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distmirror",
        description="Euclidean mirror estimation and parameter recovery "
        "for sampled distribution families.",
    )
    parser.add_argument("--version", action="version", version=f"distmirror {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, input_help):
        p.add_argument("--input", required=True, help=input_help)
        p.add_argument("--output", required=True, help="output CSV path")

    p = sub.add_parser("distmat", help="pairwise distance matrix from samples")
    add_io(p, "dataset file (ndjson or csv)")
    p.add_argument("--format", choices=["ndjson", "csv"], default="ndjson")
    p.add_argument("--metric", choices=["w1", "w2", "external"], default="w1")
    p.set_defaults(handler=_cmd_distmat)

    p = sub.add_parser("embed", help="classical MDS embedding of a distance matrix")
    add_io(p, "distance matrix CSV")
    p.add_argument("--dim", default="auto", help="embedding dimension or 'auto'")
    p.add_argument("--spectrum", help="spectrum CSV path (default: <output>.spectrum.csv)")
    p.set_defaults(handler=_cmd_embed)

    p = sub.add_parser("diagnose", help="realizability diagnostics of a distance matrix")
    p.add_argument("--input", required=True, help="distance matrix CSV")
    p.add_argument("--output", help="optional spectrum CSV path")
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("fit", help="fit and export a mirror surface")
    p.add_argument("--embedding", required=True, help="embedding CSV from 'embed'")
    p.add_argument("--params", required=True, help="parameter CSV (id, p1..pd)")
    p.add_argument("--method", choices=["delaunay", "bspline"], default="delaunay")
    p.add_argument("--grid-res", type=int, default=25, help="evaluation grid resolution")
    p.add_argument("--output", required=True, help="surface evaluation CSV")
    p.add_argument("--triangulation", help="optional triangulation export CSV")
    p.add_argument("--normalize-params", action="store_true")
    p.add_argument("--degree", type=int, default=3, help="bspline degree")
    p.add_argument("--knots", type=int, default=8, help="bspline interior knots per axis")
    p.add_argument("--penalty", type=float, default=1e-2, help="bspline penalty")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("recover", help="recover parameters of unlabeled sets")
    add_io(p, "dataset file with labeled (+ unlabeled) sets")
    p.add_argument("--format", choices=["ndjson", "csv"], default="ndjson")
    p.add_argument("--metric", choices=["w1", "w2", "external"], default="w1")
    p.add_argument("--dim", default=None, help="mirror dimension, integer or 'auto' (default: d)")
    p.add_argument("--leave-one-out", action="store_true",
                   help="hold out each labeled set instead of recovering unlabeled ones")
    p.add_argument("--normalize-params", action="store_true")
    p.set_defaults(handler=_cmd_recover)

    p = sub.add_parser("simulate", help="run a Gaussian family study")
    p.add_argument("--experiment", choices=[v.value for v in FamilyVariant], required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--n-values", help="comma-separated sample sizes")
    p.add_argument("--seeds", help="comma-separated seeds (mean-only study)")
    p.add_argument("--seed", type=int, help="seed (mean-sd study)")
    p.set_defaults(handler=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except MirrorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
