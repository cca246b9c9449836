"""Exact convex hulls in dimensions two through six.

Dimension two uses a monotone-chain scan.  Higher dimensions use incremental
beneath-beyond insertion: maintain a simplicial facet complex, and for each
new point delete the facets it sees, stitch new facets onto the horizon
ridges, and keep facet adjacency in a ridge-keyed table.  Floating-point
sidedness predicates use an absolute tolerance of ``1e-9`` times the
coordinate scale of the input; exact index order breaks ties, which keeps the
construction deterministic.

The public facet list merges coplanar simplicial facets (a cube has six
facets, not twelve triangles); the simplicial complex is retained internally
because downstream volume and surface computations are simplest on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ContractViolation, DegeneracyError, LatticeError

REL_TOL = 1e-9
_NORMAL_TOL = 1e-10
_DEAD = 1.0e300


@dataclass(frozen=True)
class Facet:
    """One facet of a polytope: its vertices and outward supporting plane.

    ``vertex_ids`` index into the owning polytope's vertex array and has at
    least ``dim`` entries (more when coplanar simplicial facets were merged).
    Every listed vertex lies on the plane ``<normal, x> = offset`` within
    ``REL_TOL`` times the coordinate scale.
    """

    vertex_ids: tuple[int, ...]
    normal: tuple[float, ...]
    offset: float


@dataclass(eq=False)
class Polytope:
    """A full-dimensional convex polytope produced by ``convex_hull``.

    ``vertices`` holds only the extreme points, ordered by their first
    appearance in the input.  ``interior_point`` is the vertex centroid.  The
    underscore arrays describe the simplicial boundary triangulation used by
    the measure computations.
    """

    dim: int
    vertices: np.ndarray
    facets: list[Facet]
    interior_point: np.ndarray
    scale: float
    _simplices: np.ndarray = field(repr=False)
    _normals: np.ndarray = field(repr=False)
    _offsets: np.ndarray = field(repr=False)
    _merged_of_simplex: np.ndarray = field(repr=False)
    _simplex_areas: np.ndarray | None = field(default=None, repr=False)

    @property
    def tolerance(self) -> float:
        return REL_TOL * self.scale

    def contains(self, x: np.ndarray) -> bool:
        return contains_point(self, x)


def convex_hull(points, dim: int | None = None) -> Polytope:
    """Convex hull of the given points (shape ``(count, dim)``).

    Requires at least ``dim + 1`` affinely independent points; otherwise a
    ``DegeneracyError`` reports the size of the largest independent subset
    found.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2:
        raise ContractViolation("points must be a 2-d array of shape (count, dim)")
    if dim is not None and pts.shape[1] != dim:
        raise ContractViolation(
            f"points have dimension {pts.shape[1]}, expected {dim}"
        )
    d = pts.shape[1]
    if not (1 <= d <= 6):
        raise ContractViolation(f"dimension must lie in [1, 6], got {d}")
    if not np.all(np.isfinite(pts)):
        raise ContractViolation("points must be finite")
    if pts.shape[0] < d + 1:
        raise DegeneracyError(
            f"need at least {d + 1} points in dimension {d}, got {pts.shape[0]}",
            subset_size=pts.shape[0],
        )
    scale = max(float(np.abs(pts).max()), 1e-12)
    tol = REL_TOL * scale
    if d == 1:
        return _hull_1d(pts, scale, tol)
    if d == 2:
        simplices = _hull_2d(pts, tol)
    else:
        simplices = _hull_nd(pts, tol)
    return _assemble(pts, simplices, scale, tol)


def contains_point(p: Polytope, x) -> bool:
    """Whether ``x`` lies in the polytope, within the construction tolerance."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.dim,):
        raise ContractViolation(f"point must have shape ({p.dim},)")
    slack = p._normals @ x - p._offsets
    return bool(slack.max() <= p.tolerance)


def facet_adjacency(p: Polytope) -> list[tuple[int, int, tuple[int, ...]]]:
    """Ridges of the polytope as ``(facet_a, facet_b, ridge_vertex_ids)``.

    Facet indices refer to ``p.facets`` (the merged facets); each adjacent
    pair appears exactly once, in sorted order.
    """
    if p.dim == 1:
        return []
    incidence: dict[tuple[int, ...], list[int]] = {}
    for row, simplex in enumerate(p._simplices):
        verts = tuple(int(v) for v in simplex)
        for k in range(p.dim):
            ridge = verts[:k] + verts[k + 1 :]
            incidence.setdefault(ridge, []).append(row)
    pairs: dict[tuple[int, int], set[int]] = {}
    for ridge, rows in incidence.items():
        if len(rows) != 2:
            raise LatticeError(
                f"ridge {ridge} has {len(rows)} incident facets, expected 2"
            )
        ma = int(p._merged_of_simplex[rows[0]])
        mb = int(p._merged_of_simplex[rows[1]])
        if ma == mb:
            continue  # internal ridge of a merged facet
        key = (min(ma, mb), max(ma, mb))
        pairs.setdefault(key, set()).update(ridge)
    return [
        (a, b, tuple(sorted(verts))) for (a, b), verts in sorted(pairs.items())
    ]


def polytope_to_json(p: Polytope) -> str:
    """Debug dump: dimension, vertices, and merged facets as a JSON document."""
    doc = {
        "dim": p.dim,
        "vertices": [[float(c) for c in v] for v in p.vertices],
        "facets": [
            {
                "vertex_ids": list(f.vertex_ids),
                "normal": list(f.normal),
                "offset": f.offset,
            }
            for f in p.facets
        ],
    }
    return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------------------
# construction internals


def _hull_1d(pts: np.ndarray, scale: float, tol: float) -> Polytope:
    lo = int(np.argmin(pts[:, 0]))
    hi = int(np.argmax(pts[:, 0]))
    if pts[hi, 0] - pts[lo, 0] <= tol:
        raise DegeneracyError("all points coincide within tolerance", subset_size=1)
    ids = sorted((lo, hi))
    vertices = pts[ids]
    order = {old: new for new, old in enumerate(ids)}
    simplices = np.array([[order[lo]], [order[hi]]])
    normals = np.array([[-1.0], [1.0]])
    offsets = np.array(
        [float(n @ vertices[s[0]]) for n, s in zip(normals, simplices)]
    )
    facets = [
        Facet((int(s[0]),), tuple(map(float, n)), float(o))
        for s, n, o in zip(simplices, normals, offsets)
    ]
    return Polytope(
        dim=1,
        vertices=vertices,
        facets=facets,
        interior_point=vertices.mean(axis=0),
        scale=scale,
        _simplices=simplices,
        _normals=normals,
        _offsets=offsets,
        _merged_of_simplex=np.arange(2),
    )


def _hull_2d(pts: np.ndarray, tol: float) -> list[tuple[int, ...]]:
    """Monotone-chain hull; returns the edge list as index pairs."""
    order = np.lexsort((pts[:, 1], pts[:, 0])).tolist()
    xs = pts[:, 0].tolist()
    ys = pts[:, 1].tolist()

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2:
                j, k = out[-2], out[-1]
                cross = (xs[k] - xs[j]) * (ys[i] - ys[j]) - (ys[k] - ys[j]) * (
                    xs[i] - xs[j]
                )
                if cross <= 0.0:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    cycle = lower[:-1] + upper[:-1]
    if len(cycle) < 3:
        raise DegeneracyError(
            "points are collinear within tolerance", subset_size=min(len(cycle), 2)
        )
    return [
        (cycle[t], cycle[(t + 1) % len(cycle)]) for t in range(len(cycle))
    ]


def _initial_simplex(pts: np.ndarray, tol: float) -> list[int]:
    """First two vertices from the extremes of the widest axis, the rest by
    greedy farthest-point completion; index order breaks ties."""
    n, d = pts.shape
    spans = pts.max(axis=0) - pts.min(axis=0)
    axis = int(np.argmax(spans))
    i0 = int(np.argmin(pts[:, axis]))
    i1 = int(np.argmax(pts[:, axis]))
    if spans[axis] <= tol:
        raise DegeneracyError("all points coincide within tolerance", subset_size=1)
    chosen = [i0, i1]
    origin = pts[i0]
    basis = np.empty((d, d))
    v = pts[i1] - origin
    basis[0] = v / np.linalg.norm(v)
    nb = 1
    shifted = pts - origin
    while len(chosen) < d + 1:
        resid = shifted - (shifted @ basis[:nb].T) @ basis[:nb]
        dist = np.linalg.norm(resid, axis=1)
        j = int(np.argmax(dist))
        if dist[j] <= tol:
            raise DegeneracyError(
                f"points span only {len(chosen) - 1} dimensions within tolerance",
                subset_size=len(chosen),
            )
        chosen.append(j)
        w = resid[j]
        w = w - (w @ basis[:nb].T) @ basis[:nb]  # re-orthogonalise once
        basis[nb] = w / np.linalg.norm(w)
        nb += 1
    return chosen


def _plane_batch(pts, vert_rows, centre):
    """Outward planes through ``d`` points each, oriented away from ``centre``.

    Writing the plane as ``<a, x - centre> = 1`` makes orientation automatic:
    ``centre`` sits strictly on the negative side.  Returns unit normals and
    offsets in original coordinates.
    """
    mats = pts[vert_rows] - centre
    k, d = mats.shape[:2]
    # Componentwise Cramer beats the LAPACK round trip on the large batches
    # coming from _assemble; for the handful of facets added per insertion
    # the single gufunc call is cheaper than many tiny elementwise ops.
    with np.errstate(divide="ignore", invalid="ignore"):
        if d == 2 and k >= 32:
            a0, a1 = mats[:, 0, 0], mats[:, 0, 1]
            b0, b1 = mats[:, 1, 0], mats[:, 1, 1]
            det = a0 * b1 - a1 * b0
            coeff = np.empty((k, 2))
            coeff[:, 0] = (b1 - a1) / det
            coeff[:, 1] = (a0 - b0) / det
        elif d == 3 and k >= 64:
            a0, a1, a2 = mats[:, 0, 0], mats[:, 0, 1], mats[:, 0, 2]
            b0, b1, b2 = mats[:, 1, 0], mats[:, 1, 1], mats[:, 1, 2]
            c0, c1, c2 = mats[:, 2, 0], mats[:, 2, 1], mats[:, 2, 2]
            i0, i1, i2 = b1 * c2 - b2 * c1, b2 * c0 - b0 * c2, b0 * c1 - b1 * c0
            det = a0 * i0 + a1 * i1 + a2 * i2
            coeff = np.empty((k, 3))
            coeff[:, 0] = (i0 + (c1 * a2 - c2 * a1) + (a1 * b2 - a2 * b1)) / det
            coeff[:, 1] = (i1 + (c2 * a0 - c0 * a2) + (a2 * b0 - a0 * b2)) / det
            coeff[:, 2] = (i2 + (c0 * a1 - c1 * a0) + (a0 * b1 - a1 * b0)) / det
        else:
            try:
                coeff = np.linalg.solve(mats, np.ones((k, d, 1)))[..., 0]
            except np.linalg.LinAlgError:
                raise DegeneracyError(
                    "facet vertices are affinely dependent", subset_size=d
                ) from None
    if not np.isfinite(coeff).all():
        raise DegeneracyError(
            "facet vertices are affinely dependent", subset_size=d
        )
    norms = np.sqrt(np.einsum("pd,pd->p", coeff, coeff))
    if np.any(norms < 1e-300):
        raise DegeneracyError("facet plane is undefined", subset_size=d)
    normals = coeff / norms[:, None]
    offsets = (1.0 + coeff @ centre) / norms
    return normals, offsets


class _FacetStore:
    """Growable arrays of facet planes plus a ridge-keyed adjacency table."""

    def __init__(self, dim: int, capacity: int):
        self.dim = dim
        self.normals = np.empty((capacity, dim))
        # Killing a facet overwrites its offset with a huge value, which
        # drives its violation so far negative that the visibility scan
        # never selects it again.
        self.offsets = np.empty(capacity)
        self.verts: list[tuple[int, ...]] = []
        self.alive: list[bool] = []
        self.ridge_map: dict[tuple[int, ...], list[int]] = {}
        self.count = 0

    def _grow(self, need: int) -> None:
        cap = self.normals.shape[0]
        if self.count + need <= cap:
            return
        new_cap = max(2 * cap, self.count + need)
        for name in ("normals", "offsets"):
            old = getattr(self, name)
            fresh = np.empty((new_cap,) + old.shape[1:])
            fresh[: self.count] = old[: self.count]
            setattr(self, name, fresh)

    def add(self, pts, tuples: list[tuple[int, ...]], centre) -> None:
        rows = np.asarray(tuples, dtype=np.intp)
        normals, offsets = _plane_batch(pts, rows, centre)
        self._grow(len(tuples))
        lo = self.count
        self.normals[lo : lo + len(tuples)] = normals
        self.offsets[lo : lo + len(tuples)] = offsets
        for t, vt in enumerate(tuples):
            fid = lo + t
            self.verts.append(vt)
            self.alive.append(True)
            for k in range(self.dim):
                ridge = vt[:k] + vt[k + 1 :]
                self.ridge_map.setdefault(ridge, []).append(fid)
        self.count += len(tuples)

    def kill(self, fid: int) -> None:
        self.alive[fid] = False
        self.offsets[fid] = _DEAD

    def neighbour(self, fid: int, ridge: tuple[int, ...]) -> int:
        for g in self.ridge_map[ridge]:
            if g != fid and self.alive[g]:
                return g
        raise LatticeError(f"ridge {ridge} lost its second facet")


def _hull_nd(pts: np.ndarray, tol: float) -> list[tuple[int, ...]]:
    n, d = pts.shape
    simplex = _initial_simplex(pts, tol)
    centre = pts[simplex].mean(axis=0)
    store = _FacetStore(d, capacity=max(64, 8 * (d + 1)))
    start = [
        tuple(sorted(set(simplex) - {v})) for v in sorted(simplex, reverse=True)
    ]
    store.add(pts, start, centre)

    in_simplex = set(simplex)
    for i in range(n):
        if i in in_simplex:
            continue
        p = pts[i]
        m = store.count
        viol = store.normals[:m] @ p
        viol -= store.offsets[:m]
        seeds = np.flatnonzero(viol > tol)
        if seeds.size == 0:
            continue  # beneath every facet: interior or boundary point
        visible = set(seeds.tolist())
        stack = list(visible)
        while stack:
            f = stack.pop()
            vt = store.verts[f]
            for k in range(d):
                ridge = vt[:k] + vt[k + 1 :]
                for g in store.ridge_map[ridge]:
                    if (
                        g != f
                        and store.alive[g]
                        and g not in visible
                        and viol[g] > -tol
                    ):
                        visible.add(g)
                        stack.append(g)
        horizon: list[tuple[int, ...]] = []
        for f in visible:
            vt = store.verts[f]
            for k in range(d):
                ridge = vt[:k] + vt[k + 1 :]
                if store.neighbour(f, ridge) not in visible:
                    horizon.append(ridge)
        if not horizon:
            raise LatticeError("visible region has no horizon")
        for f in visible:
            store.kill(f)
        new_tuples = [tuple(sorted(r + (i,))) for r in horizon]
        store.add(pts, new_tuples, centre)

    return [store.verts[f] for f in range(store.count) if store.alive[f]]


def _assemble(
    pts: np.ndarray, simplices: list[tuple[int, ...]], scale: float, tol: float
) -> Polytope:
    d = pts.shape[1]
    used = sorted({v for s in simplices for v in s})
    remap = {old: new for new, old in enumerate(used)}
    vertices = np.ascontiguousarray(pts[used])
    rows = np.array(
        [sorted(remap[v] for v in s) for s in simplices], dtype=np.intp
    )
    interior = vertices.mean(axis=0)
    normals, offsets = _plane_batch(vertices, rows, interior)
    merged_of, merged_facets = _merge_coplanar(
        vertices, rows, normals, offsets, tol
    )
    return Polytope(
        dim=d,
        vertices=vertices,
        facets=merged_facets,
        interior_point=interior,
        scale=scale,
        _simplices=rows,
        _normals=normals,
        _offsets=offsets,
        _merged_of_simplex=merged_of,
    )


def _merge_coplanar(vertices, rows, normals, offsets, tol):
    """Union adjacent simplicial facets lying in a common supporting plane."""
    nf, d = rows.shape
    incidence: dict[tuple[int, ...], list[int]] = {}
    for row in range(nf):
        verts = tuple(int(v) for v in rows[row])
        for k in range(d):
            ridge = verts[:k] + verts[k + 1 :]
            incidence.setdefault(ridge, []).append(row)
    pairs = np.empty((len(incidence), 2), dtype=np.intp)
    for idx, rows_pair in enumerate(incidence.values()):
        if len(rows_pair) != 2:
            raise LatticeError("boundary triangulation is not a closed manifold")
        pairs[idx] = rows_pair
    a, b = pairs[:, 0], pairs[:, 1]
    res_ab = np.abs(
        np.einsum("pkd,pd->pk", vertices[rows[a]], normals[b])
        - offsets[b][:, None]
    ).max(axis=1)
    res_ba = np.abs(
        np.einsum("pkd,pd->pk", vertices[rows[b]], normals[a])
        - offsets[a][:, None]
    ).max(axis=1)
    same_side = np.einsum("pd,pd->p", normals[a], normals[b]) > 0.9
    merge = same_side & (res_ab <= tol) & (res_ba <= tol)

    if not merge.any():
        # Generic position: every simplex is its own facet.
        row_dots = np.einsum("fkd,fd->fk", vertices[rows], normals)
        mean_offsets = row_dots.mean(axis=1)
        facets = [
            Facet(tuple(vt), tuple(nm), off)
            for vt, nm, off in zip(
                rows.tolist(), normals.tolist(), mean_offsets.tolist()
            )
        ]
        return np.arange(nf, dtype=np.intp), facets

    parent = list(range(nf))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pa, pb in pairs[merge].tolist():
        ra, rb = find(pa), find(pb)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for row in range(nf):
        groups.setdefault(find(row), []).append(row)
    merged_of = np.empty(nf, dtype=np.intp)
    facets = []
    for mid, (_, members) in enumerate(sorted(groups.items())):
        for row in members:
            merged_of[row] = mid
        vert_ids = tuple(sorted({int(v) for row in members for v in rows[row]}))
        normal = normals[members].mean(axis=0)
        normal /= np.linalg.norm(normal)
        offset = float(np.mean(vertices[list(vert_ids)] @ normal))
        facets.append(Facet(vert_ids, tuple(map(float, normal)), offset))
    return merged_of, facets
