"""Incremental convex hull: lattice structure, predicates, and invariants.

Qhull (via scipy.spatial.ConvexHull) supplies independent volume and
surface-area oracles for random inputs; small polytopes with known face
counts pin the combinatorics.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull as QhullHull

from polylab.bodies import ConvexBody, sample_boundary_batch, sample_sphere_batch
from polylab.errors import DegeneracyError
from polylab.hull import (
    contains_point,
    convex_hull,
    facet_adjacency,
    polytope_to_json,
)
from polylab.measures import surface_area_half, volume
from polylab.rng import scratch_stream


def _unit_simplex_points(d: int) -> np.ndarray:
    return np.vstack([np.zeros(d), np.eye(d)])


def _cube_points(d: int, scale: float = 1.0) -> np.ndarray:
    corners = np.array(
        [[(i >> k) & 1 for k in range(d)] for i in range(2**d)], dtype=float
    )
    return corners * scale


def _circle_points(count: int) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# face counts on known polytopes


def test_simplex_counts_d3():
    p = convex_hull(_unit_simplex_points(3))
    assert p.dim == 3
    assert len(p.vertices) == 4
    assert len(p.facets) == 4


def test_square_with_interior_point_discarded():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
    p = convex_hull(pts)
    assert len(p.vertices) == 4
    assert len(p.facets) == 4


def test_hundred_circle_points_all_extreme():
    p = convex_hull(_circle_points(100))
    assert len(p.vertices) == 100
    assert len(p.facets) == 100


def test_cube_merges_to_six_facets():
    p = convex_hull(_cube_points(3))
    assert len(p.vertices) == 8
    assert len(p.facets) == 6
    assert sorted(len(f.vertex_ids) for f in p.facets) == [4] * 6


def test_cross_polytope_counts():
    for d in (2, 3, 4):
        pts = np.vstack([np.eye(d), -np.eye(d)])
        p = convex_hull(pts)
        assert len(p.vertices) == 2 * d
        assert len(p.facets) == 2**d
        assert volume(p) == pytest.approx(2.0**d / math.factorial(d), rel=1e-12)


def test_hypercube_d4_counts_and_volume():
    p = convex_hull(_cube_points(4))
    assert len(p.vertices) == 16
    assert len(p.facets) == 8
    assert volume(p) == pytest.approx(1.0, rel=1e-12)


def test_sphere_points_are_all_hull_vertices():
    for d in (2, 3, 4):
        pts = sample_sphere_batch(d, 60, scratch_stream(900 + d))
        p = convex_hull(pts)
        assert len(p.vertices) == 60


# ---------------------------------------------------------------------------
# membership predicate


def test_contains_centroid_and_vertices():
    p = convex_hull(_unit_simplex_points(3))
    centroid = p.vertices.mean(axis=0)
    assert contains_point(p, centroid)
    for v in p.vertices:
        assert contains_point(p, v)


def test_far_point_outside():
    p = convex_hull(_unit_simplex_points(3))
    assert not contains_point(p, np.array([10.0, 0.0, 0.0]))


def test_near_boundary_points():
    p = convex_hull(_circle_points(64))
    assert contains_point(p, np.array([0.0, 0.0]))
    assert not contains_point(p, np.array([1.01, 0.0]))


# ---------------------------------------------------------------------------
# adjacency and Euler relation


def test_tetrahedron_adjacency():
    p = convex_hull(_unit_simplex_points(3))
    ridges = facet_adjacency(p)
    assert len(ridges) == 6
    for f1, f2, verts in ridges:
        assert f1 != f2
        assert len(verts) == 2


def test_cube_adjacency_after_merging():
    p = convex_hull(_cube_points(3))
    ridges = facet_adjacency(p)
    assert len(ridges) == 12
    # Each merged square facet borders exactly four neighbours.
    degree = {}
    for f1, f2, _ in ridges:
        degree[f1] = degree.get(f1, 0) + 1
        degree[f2] = degree.get(f2, 0) + 1
    assert sorted(degree.values()) == [4] * 6


def test_square_adjacency():
    p = convex_hull(_circle_points(4))
    ridges = facet_adjacency(p)
    assert len(ridges) == 4
    for _, _, verts in ridges:
        assert len(verts) == 1


def test_euler_relation_random_d3():
    for seed in (1, 2, 3):
        pts = sample_sphere_batch(3, 50, scratch_stream(910 + seed))
        p = convex_hull(pts)
        v = len(p.vertices)
        e = len(facet_adjacency(p))
        f = len(p.facets)
        assert v - e + f == 2


# ---------------------------------------------------------------------------
# geometric invariants


def test_facet_normals_unit_and_vertices_on_plane():
    pts = sample_boundary_batch(ConvexBody.ellipsoid((1.0, 2.0, 0.7)), 40, scratch_stream(920))
    p = convex_hull(pts)
    for f in p.facets:
        n = np.array(f.normal)
        assert abs(np.linalg.norm(n) - 1.0) < 1e-10
        for vid in f.vertex_ids:
            assert abs(n @ p.vertices[vid] - f.offset) <= 1e-9 * p.scale


def test_all_input_points_inside_every_facet():
    rng = np.random.default_rng(99)
    for d in (2, 3, 4):
        pts = rng.normal(size=(80, d))
        p = convex_hull(pts)
        for f in p.facets:
            margins = pts @ np.array(f.normal) - f.offset
            assert margins.max() <= 1e-9 * p.scale


def test_interior_point_strictly_inside():
    pts = sample_sphere_batch(3, 30, scratch_stream(921))
    p = convex_hull(pts)
    for f in p.facets:
        assert np.array(f.normal) @ p.interior_point < f.offset


def test_idempotence():
    pts = sample_sphere_batch(3, 40, scratch_stream(922))
    p = convex_hull(pts)
    q = convex_hull(p.vertices)
    assert len(q.vertices) == len(p.vertices)
    assert len(q.facets) == len(p.facets)
    offsets_p = sorted(f.offset for f in p.facets)
    offsets_q = sorted(f.offset for f in q.facets)
    np.testing.assert_allclose(offsets_p, offsets_q, atol=1e-9)


def test_rotation_invariance_of_measures():
    pts = sample_sphere_batch(3, 60, scratch_stream(923))
    base = convex_hull(pts)
    v0, s0 = volume(base), surface_area_half(base)
    rng = np.random.default_rng(2718)
    for _ in range(10):
        rot = _random_rotation(3, rng)
        p = convex_hull(pts @ rot.T)
        assert volume(p) == pytest.approx(v0, rel=1e-8)
        assert surface_area_half(p) == pytest.approx(s0, rel=1e-8)


def test_monotonicity_under_point_insertion():
    rng = np.random.default_rng(31)
    pts = rng.normal(size=(25, 3))
    small = convex_hull(pts)
    extra = np.vstack([pts, rng.normal(size=(1, 3)) * 2.0])
    large = convex_hull(extra)
    for v in small.vertices:
        assert contains_point(large, v)


def test_volume_and_area_match_qhull():
    rng = np.random.default_rng(55)
    for d in (2, 3, 4, 5):
        pts = sample_sphere_batch(d, 30 if d >= 4 else 80, scratch_stream(930 + d))
        p = convex_hull(pts)
        ref = QhullHull(pts)
        assert volume(p) == pytest.approx(ref.volume, rel=1e-10)
        assert surface_area_half(p) == pytest.approx(ref.area / 2.0, rel=1e-10)
        # Gaussian clouds exercise interior-point discarding as well.
        cloud = rng.normal(size=(60, d))
        p2 = convex_hull(cloud)
        ref2 = QhullHull(cloud)
        assert volume(p2) == pytest.approx(ref2.volume, rel=1e-10)
        assert surface_area_half(p2) == pytest.approx(ref2.area / 2.0, rel=1e-10)
        assert len(p2.vertices) == len(ref2.vertices)


def test_d6_simplex_and_cross_polytope():
    p = convex_hull(_unit_simplex_points(6))
    assert len(p.facets) == 7
    assert volume(p) == pytest.approx(1.0 / math.factorial(6), rel=1e-10)
    q = convex_hull(np.vstack([np.eye(6), -np.eye(6)]))
    assert len(q.facets) == 64
    assert volume(q) == pytest.approx(2.0**6 / math.factorial(6), rel=1e-10)


# ---------------------------------------------------------------------------
# degeneracy handling


def test_too_few_points_raise():
    with pytest.raises(DegeneracyError):
        convex_hull(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_collinear_points_raise_with_subset_size():
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(DegeneracyError) as exc:
        convex_hull(pts)
    assert exc.value.subset_size >= 2


def test_coplanar_points_raise_in_d3():
    pts = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.3, 0.4, 0.0]]
    )
    with pytest.raises(DegeneracyError):
        convex_hull(pts)


def test_duplicate_points_tolerated_when_hull_is_full_dimensional():
    pts = np.vstack([_unit_simplex_points(3), _unit_simplex_points(3)])
    p = convex_hull(pts)
    assert len(p.facets) == 4
    assert volume(p) == pytest.approx(1.0 / 6.0, rel=1e-12)


# ---------------------------------------------------------------------------
# JSON dump


def test_polytope_json_round_trip():
    p = convex_hull(_unit_simplex_points(3))
    payload = json.loads(polytope_to_json(p))
    assert payload["dim"] == 3
    assert len(payload["vertices"]) == 4
    assert len(payload["facets"]) == 4
    facet = payload["facets"][0]
    assert set(facet) == {"vertex_ids", "normal", "offset"}
    n = np.array(facet["normal"])
    assert abs(np.linalg.norm(n) - 1.0) < 1e-10
