"""Lattice construction and simplex certification tests."""

import itertools
import math

import numpy as np
import pytest

from rfis.dynamics import Box, SystemModel, Zero, benchmark, linear_system
from rfis.errors import CapacityExceededError
from rfis.invariance import (
    build_lattice,
    certify_simplex,
    lattice_size,
    map_lattice,
    total_ntp,
)
from rfis.simplicial import (
    BoundaryComplex,
    barycentric_coordinates,
    cube_complex,
    longest_edge,
)


def enumerate_compositions(total, parts):
    """Independent oracle: filter the full product space."""
    return [c for c in itertools.product(range(total + 1), repeat=parts)
            if sum(c) == total]


def contracting_system():
    return linear_system(-np.eye(2), name="contract")


def expanding_system():
    return linear_system(np.eye(2), name="expand")


# -- lattice construction --------------------------------------------------------


def test_lattice_n2_m1_rows():
    lat = build_lattice(2, 1)
    rows = lat.matrix(1)
    assert rows.shape == (3, 2)
    assert {tuple(r) for r in rows} == {(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)}


def test_lattice_counts_match_enumeration_oracle():
    for n in (2, 3, 4, 5):
        lat = build_lattice(n, 3)
        for m in range(4):
            oracle = enumerate_compositions(2 ** m, n)
            assert lat.count(m) == len(oracle)
            assert lat.count(m) == lattice_size(n, m)
            got = {tuple(np.round(r * 2 ** m).astype(int)) for r in lat.matrix(m)}
            assert got == set(oracle)


def test_lattice_binomial_examples():
    assert lattice_size(3, 1) == math.comb(4, 2)
    assert lattice_size(4, 2) == math.comb(7, 4)
    assert lattice_size(4, 2) == 35


def test_lattice_rows_are_weights():
    lat = build_lattice(3, 3)
    for m in range(4):
        rows = lat.matrix(m)
        assert np.all(rows >= 0)
        assert np.allclose(rows.sum(axis=1), 1.0)
        # entries are integer multiples of 2^-m
        assert np.allclose(np.round(rows * 2 ** m), rows * 2 ** m)


def test_lattice_includes_vertices_at_all_levels():
    lat = build_lattice(3, 3)
    for m in range(4):
        rows = {tuple(r) for r in lat.matrix(m)}
        for i in range(3):
            e = [0.0] * 3
            e[i] = 1.0
            assert tuple(e) in rows


def test_lattice_capacity_budget():
    with pytest.raises(CapacityExceededError):
        build_lattice(4, 8, budget=1000)


def test_lattice_order_deterministic():
    a = build_lattice(3, 2)
    b = build_lattice.__wrapped__(3, 2)
    for m in range(3):
        assert np.array_equal(a.matrix(m), b.matrix(m))


# -- lattice mapping ---------------------------------------------------------------


def test_map_lattice_vertex_and_centroid_rows():
    lat = build_lattice(2, 1)
    c = BoundaryComplex([[2.0, 1.0], [4.0, -1.0]], [[0, 1]], center=[3.0, -3.0])
    pts = map_lattice(lat, 0, c, 0)
    assert any(np.allclose(p, [2.0, 1.0]) for p in pts)
    assert any(np.allclose(p, [4.0, -1.0]) for p in pts)
    pts1 = map_lattice(lat, 1, c, 0)
    assert any(np.allclose(p, [3.0, 0.0]) for p in pts1)


def test_mapped_points_lie_on_simplex():
    rng = np.random.default_rng(21)
    lat = build_lattice(3, 2)
    for _ in range(20):
        vc = rng.normal(size=(3, 3)) * 2
        center = vc.mean(axis=0) - np.array([0.0, 0.0, 2.0])
        c = BoundaryComplex(vc, [[0, 1, 2]], center=center)
        for m in range(3):
            for p in map_lattice(lat, m, c, 0):
                assert barycentric_coordinates(p, c, 0) is not None


def test_covering_property():
    """Every simplex point is within (longest edge) * 2^-m of a lattice point."""
    rng = np.random.default_rng(22)
    lat2 = build_lattice(2, 3)
    lat3 = build_lattice(3, 3)
    for n, lat in ((2, lat2), (3, lat3)):
        for _ in range(10):
            vc = rng.normal(size=(n, n)) * 3
            center = vc.mean(axis=0)
            center[-1] -= 5.0
            c = BoundaryComplex(vc, [list(range(n))], center=center)
            r = longest_edge(vc)
            w = rng.dirichlet(np.ones(n), size=2000)
            samples = w @ vc
            for m in (1, 2, 3):
                pts = map_lattice(lat, m, c, 0)
                d2 = ((samples[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
                assert np.sqrt(d2.min(axis=1)).max() <= r * 2.0 ** -m + 1e-12


def test_adjacency_spacing():
    """Adjacent lattice points differ by one edge vector scaled by 2^-m."""
    rng = np.random.default_rng(23)
    lat = build_lattice(3, 3)
    vc = rng.normal(size=(3, 3)) * 2
    c = BoundaryComplex(vc, [[0, 1, 2]], center=vc.mean(axis=0) - [0, 0, 3.0])
    r = longest_edge(vc)
    for m in (1, 2):
        s_m = 2.0 ** -m
        pts = map_lattice(lat, m, c, 0)
        for w in pts[:20]:
            for i in range(3):
                for j in range(3):
                    if i == j:
                        continue
                    neighbor = w + s_m * (vc[i] - vc[j])
                    assert np.linalg.norm(neighbor - w) <= r * s_m + 1e-12


# -- certification -----------------------------------------------------------------


def square_complex(half):
    return cube_complex(half, [0.0, 0])


def test_contracting_edge_passes_at_level_one():
    # edge from (1,-1) to (1,1): every test value is -1, the margin needs
    # -(2)(2^-m)(1); level 0 fails, level 1 passes with equality
    c = square_complex(1.0)
    sys = contracting_system().with_lipschitz(1.0)
    lat = build_lattice(2, 8)
    edge = next(si for si in range(4)
                if np.allclose(c.simplex_coords(si)[:, 0], 1.0))
    v = certify_simplex(c, edge, sys, lat)
    assert v.certified
    assert v.passed_at_level == 1
    assert v.ntp_ratio == 0.0


def test_expanding_edge_fails_everywhere():
    c = square_complex(1.0)
    sys = expanding_system().with_lipschitz(1.0)
    lat = build_lattice(2, 4)
    edge = next(si for si in range(4)
                if np.allclose(c.simplex_coords(si)[:, 0], 1.0))
    v = certify_simplex(c, edge, sys, lat)
    assert not v.certified
    assert v.ntp_ratio == 1.0
    assert v.violating_points is not None and len(v.violating_points) > 0


def test_verdict_determinism():
    c = square_complex(2.0)
    sys = contracting_system().with_lipschitz(1.0)
    lat = build_lattice(2, 8)
    first = [certify_simplex(c, si, sys, lat) for si in range(4)]
    second = [certify_simplex(c, si, sys, lat) for si in range(4)]
    for a, b in zip(first, second):
        assert a.passed_at_level == b.passed_at_level
        assert a.ntp_ratio == b.ntp_ratio


def test_certified_simplex_satisfies_plain_condition_everywhere():
    """Soundness spot check: a pass implies inward flow on random points."""
    rng = np.random.default_rng(24)
    sys = benchmark("reversed_vdp").with_lipschitz(3.0)
    # a small slanted polygon around the origin is invariant for this system
    ang = 2 * np.pi * np.arange(8) / 8 + 0.4
    pts = 0.35 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    pts[:, 1] *= 0.8
    from rfis.simplicial import normal_vector, triangulate_convex_polytope
    from rfis.dynamics import support_value

    c = triangulate_convex_polytope(pts, [0.0, 0])
    lat = build_lattice(2, 10)
    for si in range(c.num_simplices):
        v = certify_simplex(c, si, sys, lat)
        if not v.certified:
            continue
        normal = normal_vector(c, si)
        vc = c.simplex_coords(si)
        w = rng.dirichlet(np.ones(2), size=1000)
        samples = w @ vc
        values = sys.drift(samples) @ normal + support_value(sys.noise, normal)
        assert values.max() <= 0.0


def test_total_ntp_matches_brute_sum():
    c = square_complex(1.0)
    sys = contracting_system().with_lipschitz(1.0)
    lat = build_lattice(2, 6)
    brute = sum(certify_simplex(c, si, sys, lat).ntp_ratio
                for si in range(c.num_simplices))
    assert total_ntp(c, sys, lat) == pytest.approx(brute)
    assert total_ntp(c, sys, lat) == 0.0


def test_total_ntp_with_one_violating_simplex():
    # mirror-symmetric field: inward on three sides, outward on the right
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = -x.copy()
        out[..., 0] = x[..., 0] ** 3
        return out

    sys = SystemModel(2, drift, Zero(), lipschitz=30.0)
    c = square_complex(2.0)
    lat = build_lattice(2, 6)
    per = [certify_simplex(c, si, sys, lat).ntp_ratio for si in range(4)]
    assert sum(1 for p in per if p == 1.0) == 2  # left and right edges blow out
    assert total_ntp(c, sys, lat) == pytest.approx(sum(per))


def test_total_ntp_subset_and_threads():
    c = square_complex(1.5)
    sys = contracting_system().with_lipschitz(1.0)
    lat = build_lattice(2, 6)
    full = total_ntp(c, sys, lat)
    assert total_ntp(c, sys, lat, subset=[0, 1]) <= full + 1e-15
    assert total_ntp(c, sys, lat, threads=4) == full


def test_noise_enters_certification():
    c = square_complex(0.02)
    # contraction too weak to beat the noise near the boundary
    noisy = linear_system(-np.eye(2), noise=Box((-0.05, -0.05), (0.05, 0.05)))
    lat = build_lattice(2, 6)
    assert total_ntp(c, noisy, lat) > 0
    big = square_complex(2.0)
    noisy_ok = linear_system(-np.eye(2), noise=Box((-0.05, -0.05), (0.05, 0.05)))
    assert total_ntp(big, noisy_ok, lat) == 0.0
