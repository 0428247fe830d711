"""Geometric kernel tests against independent oracles."""

import itertools
import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from rfis.errors import (
    CenterOutsideError,
    DegenerateInputError,
    UnknownVertexError,
)
from rfis.simplicial import (
    BoundaryComplex,
    Containment,
    barycentric_coordinates,
    barycentric_subdivision,
    centroidal_subdivision,
    classify_points,
    closed_star,
    cofactor_normals,
    containment,
    cube_complex,
    enclosed_volume,
    normal_vector,
    regular_polygon,
    simplex_volume,
    triangulate_convex_polytope,
)


def shoelace(points):
    """Signed-area oracle for a 2D polygon given in cyclic order."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def scan_star(c, v):
    """Brute-force closed-star oracle."""
    return sorted(si for si, row in enumerate(c.simplices) if v in row)


def face_counts(c):
    """Multiplicity of every (n-2)-face across the simplex list."""
    counts = {}
    for row in c.simplices:
        for drop in range(c.dim):
            key = tuple(sorted(np.delete(row, drop)))
            counts[key] = counts.get(key, 0) + 1
    return counts


# -- normals ------------------------------------------------------------------


def test_normal_axis_aligned_edge():
    c = BoundaryComplex([[0.0, 0], [1, 0]], [[0, 1]], center=[0.5, -1.0])
    assert np.allclose(normal_vector(c, 0), [0, 1])


def test_normal_plane_z0():
    c = BoundaryComplex([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]],
                        center=[0.2, 0.2, -1.0])
    assert np.allclose(normal_vector(c, 0), [0, 0, 1])


def test_normal_matches_cross_product_oracle():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        vc = rng.normal(size=(3, 3))
        raw = cofactor_normals(vc)
        cross = np.cross(vc[1] - vc[0], vc[2] - vc[0])
        assert np.allclose(raw, cross, atol=1e-12)


def test_outward_normal_positive_against_cross_after_correction():
    rng = np.random.default_rng(8)
    for _ in range(200):
        vc = rng.normal(size=(3, 3)) + 5.0
        center = vc.mean(axis=0) - rng.uniform(1, 2) * np.cross(
            vc[1] - vc[0], vc[2] - vc[0]) / np.linalg.norm(
            np.cross(vc[1] - vc[0], vc[2] - vc[0]))
        c = BoundaryComplex(vc, [[0, 1, 2]], center=center)
        unit = normal_vector(c, 0)
        cross = np.cross(vc[1] - vc[0], vc[2] - vc[0])
        cross /= np.linalg.norm(cross)
        assert abs(abs(unit @ cross) - 1) < 1e-10
        assert unit @ (vc.mean(axis=0) - center) > 0


# -- volumes ------------------------------------------------------------------


def test_unit_triangle_volume():
    assert simplex_volume(np.array([[0.0, 0], [1, 0], [0, 1]])) == pytest.approx(0.5)


def test_unit_tetrahedron_volume():
    vc = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert simplex_volume(vc) == pytest.approx(1 / 6)


def test_random_tetrahedra_match_hull_volume_oracle():
    rng = np.random.default_rng(11)
    for _ in range(100):
        vc = rng.normal(size=(4, 3))
        hull = ConvexHull(vc)
        got = simplex_volume(vc)
        assert got == pytest.approx(hull.volume, rel=1e-12)


def test_cube_volume_is_8000():
    c = cube_complex(10.0, [0.0, 0, 0])
    assert enclosed_volume(c) == pytest.approx(8000.0, rel=1e-12)


def test_square_volume():
    c = cube_complex(1.0, [0.0, 0])
    assert enclosed_volume(c) == pytest.approx(4.0, rel=1e-12)


def test_hexagon_matches_shoelace_oracle():
    ang = 2 * np.pi * np.arange(6) / 6
    pts = np.stack([2.5 * np.cos(ang), 2.5 * np.sin(ang)], axis=1)
    c = triangulate_convex_polytope(pts, [0.0, 0])
    assert enclosed_volume(c) == pytest.approx(shoelace(pts), rel=1e-12)


def test_random_hulls_match_hull_volume_oracle():
    rng = np.random.default_rng(12)
    for n in (2, 3):
        for _ in range(20):
            pts = rng.normal(size=(12, n))
            hull = ConvexHull(pts)
            c = triangulate_convex_polytope(pts, pts[hull.vertices].mean(axis=0))
            assert enclosed_volume(c) == pytest.approx(hull.volume, rel=1e-10)


# -- barycentric coordinates --------------------------------------------------


def test_barycentric_vertex_and_centroid():
    c = BoundaryComplex([[0.0, 0, 0], [2, 0, 0], [0, 2, 0]], [[0, 1, 2]],
                        center=[0.5, 0.5, -1.0])
    lam = barycentric_coordinates([0.0, 0, 0], c, 0)
    assert np.allclose(lam, [1, 0, 0], atol=1e-10)
    centroid = c.simplex_coords(0).mean(axis=0)
    lam = barycentric_coordinates(centroid, c, 0)
    assert np.allclose(lam, [1 / 3] * 3, atol=1e-10)


def test_barycentric_recovers_random_weights():
    rng = np.random.default_rng(13)
    for _ in range(200):
        vc = rng.normal(size=(3, 3))
        c = BoundaryComplex(vc, [[0, 1, 2]], center=vc.mean(axis=0) - [0, 0, 1.5])
        w = rng.dirichlet([1.0, 1, 1])
        x = w @ vc
        lam = barycentric_coordinates(x, c, 0)
        assert lam is not None
        assert np.allclose(lam, w, atol=1e-10)


def test_barycentric_rejects_outside_point():
    c = BoundaryComplex([[0.0, 0], [1, 0]], [[0, 1]], center=[0.5, -1.0])
    assert barycentric_coordinates([2.0, 0.0], c, 0) is None
    assert barycentric_coordinates([0.5, 0.7], c, 0) is None


# -- stars --------------------------------------------------------------------


def test_closed_star_square():
    c = cube_complex(1.0, [0.0, 0])
    for v in range(c.num_vertices):
        assert sorted(closed_star(c, v).tolist()) == scan_star(c, v)
        assert len(closed_star(c, v)) == 2


def test_closed_star_cube_corner_counts():
    c = cube_complex(10.0, [0.0, 0, 0])
    for v in range(c.num_vertices):
        star = sorted(closed_star(c, v).tolist())
        assert star == scan_star(c, v)
        assert 3 <= len(star) <= 6


def test_closed_star_unknown_vertex():
    c = cube_complex(1.0, [0.0, 0])
    with pytest.raises(UnknownVertexError):
        closed_star(c, 99)


def test_star_of_new_barycenter_is_six_children():
    c = cube_complex(1.0, [0.0, 0, 0])
    sub = barycentric_subdivision(c)
    # the barycenter of parent simplex 0 is the vertex at its centroid
    centroid = c.simplex_coords(0).mean(axis=0)
    matches = np.where(np.all(np.isclose(sub.coords, centroid), axis=1))[0]
    assert len(matches) == 1
    star = closed_star(sub, int(matches[0]))
    assert len(star) == 6
    assert sorted(star.tolist()) == scan_star(sub, int(matches[0]))


# -- subdivision --------------------------------------------------------------


def test_edge_subdivides_into_two_at_midpoint():
    for subdivide in (barycentric_subdivision, centroidal_subdivision):
        c = BoundaryComplex([[1.0, 1], [-1, 1], [-1, -1], [1, -1]],
                            [[0, 1], [1, 2], [2, 3], [3, 0]], center=[0.0, 0])
        sub = subdivide(c)
        assert sub.num_simplices == 8
        mid = 0.5 * (c.coords[0] + c.coords[1])
        assert any(np.allclose(sub.coords[v], mid) for v in range(4, sub.num_vertices))


def test_triangle_subdivision_counts():
    c = cube_complex(1.0, [0.0, 0, 0])
    assert barycentric_subdivision(c).num_simplices == c.num_simplices * 6
    assert centroidal_subdivision(c).num_simplices == c.num_simplices * 3


def test_subdivision_preserves_volume_and_invariants():
    rng = np.random.default_rng(14)
    for n in (2, 3):
        pts = rng.normal(size=(10, n)) * 3
        hull_center = pts[ConvexHull(pts).vertices].mean(axis=0)
        c = triangulate_convex_polytope(pts, hull_center)
        vol = enclosed_volume(c)
        for subdivide in (barycentric_subdivision, centroidal_subdivision):
            sub = subdivide(c)
            assert enclosed_volume(sub) == pytest.approx(vol, rel=1e-12)
            sub.validate()
            # a second round keeps the manifold property
            sub2 = subdivide(sub)
            assert enclosed_volume(sub2) == pytest.approx(vol, rel=1e-12)
            sub2.validate()
            assert all(k == 2 for k in face_counts(sub2).values())


# -- triangulation ------------------------------------------------------------


def test_square_triangulates_into_four_edges():
    c = triangulate_convex_polytope([[1.0, 1], [-1, 1], [-1, -1], [1, -1]], [0.0, 0])
    assert c.num_simplices == 4
    c.validate()


def test_cube_triangulates_into_12_triangles():
    c = triangulate_convex_polytope(
        np.array(list(itertools.product([-10.0, 10.0], repeat=3))), [0.0, 0, 0])
    assert c.num_simplices == 12
    assert enclosed_volume(c) == pytest.approx(8000.0, rel=1e-12)
    c.validate()


def test_random_cloud_every_face_shared_twice():
    rng = np.random.default_rng(15)
    for _ in range(10):
        pts = rng.normal(size=(30, 3))
        c = triangulate_convex_polytope(pts, [0.0, 0, 0])
        assert all(k == 2 for k in face_counts(c).values())


def test_triangulation_rejects_flat_input():
    pts = [[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    with pytest.raises(DegenerateInputError):
        triangulate_convex_polytope(pts, [0.25, 0.25, 0.0])


def test_triangulation_rejects_outside_center():
    with pytest.raises(CenterOutsideError):
        triangulate_convex_polytope([[1.0, 1], [-1, 1], [-1, -1], [1, -1]], [5.0, 0])


def test_triangulation_deterministic():
    rng = np.random.default_rng(16)
    pts = rng.normal(size=(20, 3))
    a = triangulate_convex_polytope(pts, [0.0, 0, 0])
    b = triangulate_convex_polytope(pts, [0.0, 0, 0])
    assert np.array_equal(a.simplices, b.simplices)
    assert np.array_equal(a.coords, b.coords)


# -- containment --------------------------------------------------------------


def test_containment_basic():
    c = cube_complex(1.0, [0.0, 0])
    assert containment([0.0, 0], c) is Containment.INSIDE
    assert containment([2.0, 0], c) is Containment.OUTSIDE
    assert containment([0.3, -0.2], c) is Containment.INSIDE


def test_containment_boundary_samples():
    rng = np.random.default_rng(17)
    for n in (2, 3):
        c = cube_complex(1.5, np.zeros(n))
        sel = rng.integers(0, c.num_simplices, size=50)
        w = rng.dirichlet(np.ones(n), size=50)
        pts = np.einsum("ki,kij->kj", w, c.coords[c.simplices[sel]])
        labels, pen = classify_points(c, pts)
        assert all(lab is Containment.ON_BOUNDARY for lab in labels)
        assert np.abs(pen).max() < 1e-8


def test_containment_penetration_sign():
    c = cube_complex(1.0, [0.0, 0])
    _, pen = classify_points(c, np.array([[3.0, 0.0], [0.5, 0.0]]))
    assert pen[0] == pytest.approx(2.0, abs=1e-9)
    assert pen[1] == pytest.approx(-0.5, abs=1e-9)


def test_containment_on_deformed_star_shaped_polygon():
    # pull one square vertex inward: still star-shaped around the origin
    c = cube_complex(1.0, [0.0, 0])
    coords = c.coords.copy()
    coords[0] = 0.3 * coords[0]
    c2 = c.replace_coords(coords)
    assert containment(coords[0] * 1.5, c2) is Containment.OUTSIDE
    assert containment(coords[0] * 0.5, c2) is Containment.INSIDE
