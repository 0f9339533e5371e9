"""Piecewise-linear mirror surfaces over the parameter space.

The observed parameter points are triangulated (Delaunay for d = 2, sorted
segments for d = 1); a mirror value in R^c sits at every vertex and is
interpolated barycentrically inside each simplex.  Nothing is ever
extrapolated: queries outside the convex hull return the ``None`` sentinel.

A penalized tensor-product B-spline fit is available as a smooth
alternative for d = 2.

Geometric predicates use a static epsilon of 1e-12 relative to the
coordinate scale; inputs are assumed well-conditioned (grids and similar).
Among cocircular point groups, the diagonal whose lowest endpoint index is
smaller is chosen, making triangulations reproducible across platforms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline
import scipy.linalg

from .errors import DegenerateInput, MirrorError, UnsupportedDimension

__all__ = [
    "Triangulation",
    "MirrorSurface",
    "BSplineConfig",
    "BSplineSurface",
    "AxisScaling",
    "fit_axis_scaling",
    "delaunay_triangulate",
    "locate",
    "barycentric",
    "interpolate",
    "simplex_gradients",
    "lipschitz_constant",
    "jacobian_condition_numbers",
    "hull_boundary_distance",
    "fit_bspline",
    "evaluate_bspline",
    "write_triangulation",
]

#: Barycentric slack accepted by point-location and clamping.
BARY_TOL = 1e-12
#: Relative epsilon for orientation / in-circumcircle predicates.
GEOM_EPS = 1e-12


@dataclass(frozen=True)
class Triangulation:
    """Simplicial cover of the convex hull of m parameter points.

    ``simplices`` holds (d+1)-tuples of point indices (counterclockwise for
    d = 2, sorted rows, lexicographic order); ``hull`` lists the boundary
    vertex indices, in counterclockwise cycle order for d = 2.
    """

    points: np.ndarray
    simplices: np.ndarray
    hull: np.ndarray
    _bary: np.ndarray = field(init=False, repr=False, compare=False)
    _scale: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        simplices = np.ascontiguousarray(self.simplices, dtype=np.intp)
        hull = np.ascontiguousarray(self.hull, dtype=np.intp)
        if points.ndim != 2:
            raise MirrorError("points must be an (m, d) matrix")
        d = points.shape[1]
        if simplices.ndim != 2 or simplices.shape[1] != d + 1:
            raise MirrorError("simplices must be a (K, d+1) index matrix")
        extents = points.max(axis=0) - points.min(axis=0) if len(points) else 0.0
        scale = float(np.max(extents)) if len(points) else 0.0
        # Homogeneous inverse per simplex: lambda = _bary[k] @ [x, 1].
        k = len(simplices)
        mats = np.empty((k, d + 1, d + 1), dtype=np.float64)
        for idx, simplex in enumerate(simplices):
            a = np.vstack([points[simplex].T, np.ones(d + 1)])
            try:
                mats[idx] = np.linalg.inv(a)
            except np.linalg.LinAlgError:
                raise DegenerateInput(
                    f"simplex {idx} ({simplex.tolist()}) is degenerate"
                ) from None
        for arr in (points, simplices, hull, mats):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "hull", hull)
        object.__setattr__(self, "_bary", mats)
        object.__setattr__(self, "_scale", scale)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]


@dataclass(frozen=True)
class MirrorSurface:
    """A triangulation with a mirror value in R^c at every vertex."""

    tri: Triangulation
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != self.tri.m:
            raise MirrorError(
                f"value rows ({values.shape[0]}) must match point count ({self.tri.m})"
            )
        if not np.all(np.isfinite(values)):
            raise MirrorError("surface values contain non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def c(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# geometric predicates (d = 2)
# ---------------------------------------------------------------------------


def _orient(points: np.ndarray, a: int, b: int, c: int) -> float:
    """Twice the signed area of triangle (a, b, c); > 0 means counterclockwise."""
    pa, pb, pc = points[a], points[b], points[c]
    return float((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]))


def _incircle(points: np.ndarray, a: int, b: int, c: int, d: int) -> float:
    """Positive iff d lies strictly inside the circumcircle of ccw (a, b, c)."""
    rows = points[[a, b, c]] - points[d]
    sq = np.sum(rows * rows, axis=1)
    m = np.column_stack([rows, sq])
    return float(np.linalg.det(m))


class _Mesh:
    """Mutable triangle soup with edge adjacency, used only during construction."""

    def __init__(self, points: np.ndarray, eps_area: float, eps_incircle: float):
        self.points = points
        self.eps_area = eps_area
        self.eps_incircle = eps_incircle
        self.triangles: list[tuple[int, int, int] | None] = []
        self.edges: dict[tuple[int, int], list[int]] = {}

    def _ccw(self, a: int, b: int, c: int) -> tuple[int, int, int]:
        if _orient(self.points, a, b, c) < 0:
            return (a, c, b)
        return (a, b, c)

    def add(self, a: int, b: int, c: int) -> int:
        tri = self._ccw(a, b, c)
        ti = len(self.triangles)
        self.triangles.append(tri)
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            self.edges.setdefault((min(u, v), max(u, v)), []).append(ti)
        return ti

    def remove(self, ti: int) -> None:
        tri = self.triangles[ti]
        self.triangles[ti] = None
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            self.edges[(min(u, v), max(u, v))].remove(ti)

    def live_on_edge(self, u: int, v: int) -> list[int]:
        return self.edges.get((min(u, v), max(u, v)), [])

    def third_vertex(self, ti: int, u: int, v: int) -> int:
        return next(w for w in self.triangles[ti] if w not in (u, v))

    def find_triangle(self, u: int, v: int, w: int) -> int | None:
        want = {u, v, w}
        for ti in self.live_on_edge(u, v):
            if set(self.triangles[ti]) == want:
                return ti
        return None

    # -- incremental insertion ------------------------------------------------

    def insert(self, p: int) -> None:
        ti, zero_edge = self._containing_triangle(p)
        tri = self.triangles[ti]
        pending: list[tuple[int, int, int]] = []
        if zero_edge is None:
            a, b, c = tri
            self.remove(ti)
            self.add(a, b, p)
            self.add(b, c, p)
            self.add(c, a, p)
            pending += [(a, b, p), (b, c, p), (c, a, p)]
        else:
            a, b = zero_edge
            c = self.third_vertex(ti, a, b)
            neighbors = [tj for tj in self.live_on_edge(a, b) if tj != ti]
            self.remove(ti)
            self.add(p, b, c)
            self.add(a, p, c)
            pending += [(b, c, p), (c, a, p)]
            if neighbors:
                tj = neighbors[0]
                z = self.third_vertex(tj, a, b)
                self.remove(tj)
                self.add(p, a, z)
                self.add(b, p, z)
                pending += [(a, z, p), (z, b, p)]
        self._legalize(pending)

    def _containing_triangle(self, p: int) -> tuple[int, tuple[int, int] | None]:
        """First live triangle containing p, plus the edge p sits on (if any)."""
        eps = self.eps_area
        live = [(ti, tri) for ti, tri in enumerate(self.triangles) if tri is not None]
        arr = np.array([tri for _, tri in live], dtype=np.intp)
        pa, pb, pc = (self.points[arr[:, k]] for k in range(3))
        pp = self.points[p]

        def cross_to(o, e):
            return (e[:, 0] - o[:, 0]) * (pp[1] - o[:, 1]) - (e[:, 1] - o[:, 1]) * (
                pp[0] - o[:, 0]
            )

        s = np.column_stack([cross_to(pa, pb), cross_to(pb, pc), cross_to(pc, pa)])
        candidates = np.flatnonzero(s.min(axis=1) >= -eps)
        fallback: int | None = None
        for row in candidates:
            ti = live[row][0]
            a, b, c = live[row][1]
            near = np.flatnonzero(np.abs(s[row]) <= eps)
            if near.size == 0:
                return ti, None
            if near.size == 1:
                edge = ((a, b), (b, c), (c, a))[int(near[0])]
                return ti, edge
            if fallback is None:
                fallback = ti
        if fallback is not None:
            raise DegenerateInput(f"point {p} coincides with an existing vertex")
        raise MirrorError(f"point {p} not located in any triangle")

    def _legalize(self, pending: list[tuple[int, int, int]]) -> None:
        while pending:
            u, v, p = pending.pop()
            ti = self.find_triangle(u, v, p)
            if ti is None:
                continue
            others = [tj for tj in self.live_on_edge(u, v) if tj != ti]
            if not others:
                continue
            tj = others[0]
            w = self.third_vertex(tj, u, v)
            a, b = (u, v) if _orient(self.points, u, v, p) > 0 else (v, u)
            if _incircle(self.points, a, b, p, w) > self.eps_incircle:
                self.remove(ti)
                self.remove(tj)
                self.add(u, w, p)
                self.add(w, v, p)
                pending.append((u, w, p))
                pending.append((w, v, p))

    def legalize_all(self) -> None:
        """Full Lawson pass: flip every illegal interior edge until stable.

        Needed once after the initial hull fan (which is far from Delaunay);
        incremental insertion preserves the property from then on.  Each
        flip strictly increases the lifted-paraboloid fitness, so the loop
        terminates.
        """
        guard = 4 * (len(self.triangles) + 1) ** 2
        changed = True
        while changed:
            changed = False
            for u, v in sorted(self.edges.keys()):
                live = self.edges.get((u, v), [])
                if len(live) != 2:
                    continue
                t1, t2 = live
                w2 = self.third_vertex(t2, u, v)
                a, b, c = self.triangles[t1]
                if _incircle(self.points, a, b, c, w2) > self.eps_incircle:
                    w1 = self.third_vertex(t1, u, v)
                    self.remove(t1)
                    self.remove(t2)
                    self.add(u, w1, w2)
                    self.add(v, w1, w2)
                    changed = True
                    guard -= 1
                    if guard <= 0:
                        raise MirrorError("edge flipping failed to terminate")

    # -- deterministic cocircular tie-break ------------------------------------

    def normalize_cocircular(self) -> None:
        """Flip cocircular diagonals toward the lower-indexed endpoint.

        Each flip strictly lowers the minimum endpoint index of the edge, so
        the pass terminates; flips between cocircular diagonals preserve the
        empty-circumcircle property.
        """
        changed = True
        while changed:
            changed = False
            for u, v in sorted(self.edges.keys()):
                live = self.edges.get((u, v), [])
                if len(live) != 2:
                    continue
                t1, t2 = live
                w1 = self.third_vertex(t1, u, v)
                w2 = self.third_vertex(t2, u, v)
                if min(w1, w2) >= min(u, v):
                    continue
                a, b, c = self.triangles[t1]
                if abs(_incircle(self.points, a, b, c, w2)) > self.eps_incircle:
                    continue
                s1 = _orient(self.points, w1, w2, u)
                s2 = _orient(self.points, w1, w2, v)
                if not (min(s1, s2) < -self.eps_area and max(s1, s2) > self.eps_area):
                    continue  # quad not strictly convex; flip invalid
                self.remove(t1)
                self.remove(t2)
                self.add(u, w1, w2)
                self.add(v, w1, w2)
                changed = True

    def live_triangles(self) -> list[tuple[int, int, int]]:
        return [t for t in self.triangles if t is not None]


def _convex_hull_strict(points: np.ndarray, eps_area: float) -> list[int]:
    """Counterclockwise hull via monotone chain, dropping collinear vertices."""
    order = sorted(range(len(points)), key=lambda i: (points[i, 0], points[i, 1]))

    def build(seq: list[int]) -> list[int]:
        out: list[int] = []
        for i in seq:
            while len(out) >= 2 and _orient(points, out[-2], out[-1], i) <= eps_area:
                out.pop()
            out.append(i)
        return out

    lower = build(order)
    upper = build(order[::-1])
    return lower[:-1] + upper[:-1]


def _boundary_cycle(mesh: _Mesh) -> list[int]:
    """Ordered boundary vertices (ccw), including collinear edge vertices."""
    succ: dict[int, int] = {}
    for tri in mesh.live_triangles():
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            if len(mesh.live_on_edge(u, v)) == 1:
                succ[u] = v
    if not succ:
        return []
    start = min(succ.keys())
    cycle = [start]
    cur = succ[start]
    while cur != start:
        cycle.append(cur)
        cur = succ[cur]
    return cycle


def _canonical_simplices(triangles: list[tuple[int, int, int]]) -> np.ndarray:
    rows = []
    for a, b, c in triangles:
        rot = min(((a, b, c), (b, c, a), (c, a, b)))
        rows.append(rot)
    rows.sort()
    return np.array(rows, dtype=np.intp)


def delaunay_triangulate(points: np.ndarray) -> Triangulation:
    """Triangulate m parameter points in d = 1 or 2 dimensions.

    d = 1 produces consecutive segments of the sorted points.  d = 2 runs
    incremental insertion with local edge flipping, then normalizes
    cocircular diagonals to the deterministic tie-break.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise MirrorError("points must be an (m, d) matrix")
    m, d = points.shape
    if d >= 3:
        raise UnsupportedDimension(
            f"triangulation supports d in {{1, 2}}, got d={d}"
        )
    if d < 1:
        raise MirrorError("points must have at least one coordinate")
    if not np.all(np.isfinite(points)):
        raise MirrorError("points contain non-finite values")
    if m < d + 1:
        raise DegenerateInput(f"need at least {d + 1} points for d={d}, got {m}")
    uniq = np.unique(points, axis=0)
    if uniq.shape[0] != m:
        raise DegenerateInput("points contain duplicates")

    if d == 1:
        order = np.argsort(points[:, 0], kind="stable")
        simplices = np.column_stack([order[:-1], order[1:]])
        simplices = np.sort(simplices, axis=1)
        simplices = simplices[np.lexsort((simplices[:, 1], simplices[:, 0]))]
        hull = np.array([order[0], order[-1]], dtype=np.intp)
        return Triangulation(points=points, simplices=simplices, hull=hull)

    scale = float(np.max(points.max(axis=0) - points.min(axis=0)))
    eps_area = GEOM_EPS * scale * scale
    hull_idx = _convex_hull_strict(points, eps_area)
    if len(hull_idx) < 3:
        raise DegenerateInput("all points are collinear")

    mesh = _Mesh(points, eps_area, GEOM_EPS * scale**4)
    anchor = hull_idx[0]
    for i in range(1, len(hull_idx) - 1):
        mesh.add(anchor, hull_idx[i], hull_idx[i + 1])
    mesh.legalize_all()
    on_hull = set(hull_idx)
    for p in range(m):
        if p not in on_hull:
            mesh.insert(p)
    mesh.legalize_all()
    mesh.normalize_cocircular()

    triangles = mesh.live_triangles()
    area_floor = 1e-12 * scale * scale
    for tri in triangles:
        if _orient(points, *tri) <= area_floor:
            raise DegenerateInput(
                f"triangle {tri} has non-positive area; input too degenerate"
            )
    simplices = _canonical_simplices(triangles)
    hull = np.array(_boundary_cycle(mesh), dtype=np.intp)
    return Triangulation(points=points, simplices=simplices, hull=hull)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def _homogeneous(tri: Triangulation, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (tri.d,):
        raise MirrorError(f"query point has shape {x.shape}, expected ({tri.d},)")
    return np.append(x, 1.0)


def locate(tri: Triangulation, x: np.ndarray) -> int | None:
    """Index of the simplex containing x, or None when x is outside the hull.

    Points on shared faces resolve to the lowest simplex index.
    """
    lam = tri._bary @ _homogeneous(tri, x)
    feasible = np.flatnonzero(lam.min(axis=1) >= -BARY_TOL)
    return int(feasible[0]) if feasible.size else None


def barycentric(tri: Triangulation, simplex: int, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of x in the given simplex.

    Coordinates are clamped to [0, 1] and renormalized to sum to one;
    a vertex query returns an exact unit vector.  Raises when x lies
    outside the simplex beyond tolerance.
    """
    if not 0 <= simplex < tri.n_simplices:
        raise MirrorError(f"simplex index {simplex} out of range")
    xh = _homogeneous(tri, x)
    verts = tri.simplices[simplex]
    for j, v in enumerate(verts):
        if np.array_equal(tri.points[v], xh[:-1]):
            lam = np.zeros(tri.d + 1)
            lam[j] = 1.0
            return lam
    lam = tri._bary[simplex] @ xh
    if lam.min() < -BARY_TOL:
        raise MirrorError(
            f"point {xh[:-1].tolist()} lies outside simplex {simplex} "
            f"(min coordinate {lam.min():.3e})"
        )
    lam = np.clip(lam, 0.0, 1.0)
    return lam / lam.sum()


def interpolate(surface: MirrorSurface, x: np.ndarray) -> np.ndarray | None:
    """Piecewise-linear interpolant value at x; None outside the hull.

    Exact at vertices, continuous across shared faces, and affine inside
    each simplex (so affine data is reproduced everywhere).
    """
    sid = locate(surface.tri, x)
    if sid is None:
        return None
    lam = barycentric(surface.tri, sid, x)
    return lam @ surface.values[surface.tri.simplices[sid]]


def simplex_gradients(surface: MirrorSurface) -> np.ndarray:
    """Per-simplex Jacobian of the interpolant, shape (K, c, d)."""
    tri = surface.tri
    grads = np.empty((tri.n_simplices, surface.c, tri.d))
    for k, simplex in enumerate(tri.simplices):
        # d lambda / d x is the first d columns of the homogeneous inverse.
        grads[k] = surface.values[simplex].T @ tri._bary[k][:, : tri.d]
    return grads


def lipschitz_constant(surface: MirrorSurface) -> float:
    """Lipschitz constant of the interpolant over the hull.

    Equals the largest per-simplex Jacobian spectral norm; piecewise
    affinity plus continuity make this bound tight.
    """
    grads = simplex_gradients(surface)
    if grads.size == 0:
        return 0.0
    return float(max(np.linalg.norm(g, ord=2) for g in grads))


def jacobian_condition_numbers(surface: MirrorSurface) -> np.ndarray:
    """Condition number of each simplex's Jacobian (inf where singular)."""
    grads = simplex_gradients(surface)
    out = np.empty(len(grads))
    for k, g in enumerate(grads):
        s = np.linalg.svd(g, compute_uv=False)
        out[k] = np.inf if s[-1] == 0 else float(s[0] / s[-1])
    return out


def hull_boundary_distance(tri: Triangulation, x: np.ndarray) -> float:
    """Euclidean distance from x to the hull boundary."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    pts = tri.points
    if tri.d == 1:
        lo, hi = pts[tri.hull[0], 0], pts[tri.hull[1], 0]
        return float(min(abs(x[0] - lo), abs(x[0] - hi)))
    cycle = tri.hull
    best = np.inf
    for k in range(len(cycle)):
        a = pts[cycle[k]]
        b = pts[cycle[(k + 1) % len(cycle)]]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else float(np.clip((x - a) @ ab / denom, 0.0, 1.0))
        best = min(best, float(np.linalg.norm(x - (a + t * ab))))
    return best


# ---------------------------------------------------------------------------
# axis normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxisScaling:
    """Per-axis affine map of parameter coordinates onto [0, 1]."""

    offset: np.ndarray
    scale: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.offset) / self.scale

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self.scale + self.offset


def fit_axis_scaling(points: np.ndarray) -> AxisScaling:
    """Fit the affine map sending each axis's observed range onto [0, 1]."""
    points = np.asarray(points, dtype=np.float64)
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    span = np.where(span == 0, 1.0, span)
    return AxisScaling(offset=lo, scale=span)


# ---------------------------------------------------------------------------
# penalized tensor-product B-spline surface (d = 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BSplineConfig:
    """Settings for the smooth surface fit: degree, knots per axis, penalty."""

    degree: int = 3
    interior_knots: int = 8
    penalty: float = 1e-2


@dataclass(frozen=True)
class BSplineSurface:
    """Tensor-product spline surface with difference-penalized coefficients."""

    degree: int
    knots: tuple[np.ndarray, np.ndarray]
    coefficients: np.ndarray
    penalty: float
    domain: Triangulation = field(repr=False, compare=False, default=None)


def _knot_vector(lo: float, hi: float, degree: int, interior: int) -> np.ndarray:
    """Uniform knots extended ``degree`` steps beyond each end.

    Uniform spacing keeps the coefficient-difference penalty's null space
    aligned with polynomials of the data coordinates (second-order
    differences annihilate exactly the linear functions), the standard
    difference-penalty construction.
    """
    core = np.linspace(lo, hi, interior + 2)
    h = (hi - lo) / (interior + 1)
    left = lo - h * np.arange(degree, 0, -1)
    right = hi + h * np.arange(1, degree + 1)
    return np.concatenate([left, core, right])


def _basis_rows(x: np.ndarray, knots: np.ndarray, degree: int) -> np.ndarray:
    lo, hi = knots[degree], knots[-degree - 1]
    clipped = np.clip(np.asarray(x, dtype=np.float64), lo, hi)
    return BSpline.design_matrix(clipped, knots, degree).toarray()


def _second_difference_penalty(n: int) -> np.ndarray:
    if n < 3:
        return np.zeros((n, n))
    d2 = np.diff(np.eye(n), n=2, axis=0)
    return d2.T @ d2


def fit_bspline(
    points: np.ndarray,
    values: np.ndarray,
    config: BSplineConfig = BSplineConfig(),
) -> BSplineSurface:
    """Fit a penalized tensor-product spline to scattered surface values.

    Minimizes squared residual plus ``penalty`` times the squared
    second-order differences of the coefficient grid along each axis, the
    classic difference-penalty construction.  With zero penalty the design
    must have full rank, otherwise an error suggests raising the penalty.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if points.ndim != 2 or points.shape[1] != 2:
        raise UnsupportedDimension("spline fitting requires d=2 parameter points")
    if values.shape[0] != points.shape[0]:
        raise MirrorError("values row count must match point count")
    if not np.all(np.isfinite(values)):
        raise MirrorError("surface values contain non-finite entries")
    if config.degree < 1 or config.interior_knots < 0 or config.penalty < 0:
        raise MirrorError(f"invalid spline config: {config}")
    need = (config.degree + 1) ** 2
    if points.shape[0] < need:
        raise MirrorError(
            f"need at least (degree+1)^2 = {need} points, got {points.shape[0]}"
        )

    domain = delaunay_triangulate(points)
    knots_x = _knot_vector(points[:, 0].min(), points[:, 0].max(),
                           config.degree, config.interior_knots)
    knots_y = _knot_vector(points[:, 1].min(), points[:, 1].max(),
                           config.degree, config.interior_knots)
    bx = _basis_rows(points[:, 0], knots_x, config.degree)
    by = _basis_rows(points[:, 1], knots_y, config.degree)
    nx, ny = bx.shape[1], by.shape[1]
    design = np.einsum("ij,ik->ijk", bx, by).reshape(len(points), nx * ny)

    penalty_matrix = np.kron(_second_difference_penalty(nx), np.eye(ny)) + np.kron(
        np.eye(nx), _second_difference_penalty(ny)
    )
    normal = design.T @ design + config.penalty * penalty_matrix
    rhs = design.T @ values
    try:
        coef = scipy.linalg.solve(normal, rhs, assume_a="pos")
    except np.linalg.LinAlgError:
        if config.penalty == 0:
            raise MirrorError(
                "rank-deficient spline design with zero penalty; "
                "set penalty > 0 to regularize"
            ) from None
        raise MirrorError(
            "singular spline system; data may be too sparse for the knot grid"
        ) from None
    return BSplineSurface(
        degree=config.degree,
        knots=(knots_x, knots_y),
        coefficients=coef.reshape(nx, ny, values.shape[1]),
        penalty=config.penalty,
        domain=domain,
    )


def evaluate_bspline(surf: BSplineSurface, x: np.ndarray) -> np.ndarray | None:
    """Spline value at x, with the same Outside rule as ``interpolate``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if locate(surf.domain, x) is None:
        return None
    bx = _basis_rows(x[:1], surf.knots[0], surf.degree)[0]
    by = _basis_rows(x[1:2], surf.knots[1], surf.degree)[0]
    return np.einsum("i,j,ijc->c", bx, by, surf.coefficients)


def write_triangulation(tri: Triangulation, path: str | Path) -> None:
    """Export vertices then simplex index tuples as one CSV."""
    width = tri.d + 1
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["section", "index"] + [f"c{k + 1}" for k in range(width)])
        for i, p in enumerate(tri.points):
            cells = [repr(float(c)) for c in p] + [""] * (width - tri.d)
            writer.writerow(["point", i] + cells)
        for k, s in enumerate(tri.simplices):
            writer.writerow(["simplex", k] + [int(v) for v in s])
