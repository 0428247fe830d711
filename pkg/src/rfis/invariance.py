"""Finite-test-point invariance certification of boundary simplices.

A level-m lattice is the set of points on the standard simplex whose
coordinates are multiples of 2^-m; mapped onto a boundary simplex it gives a
covering mesh whose spacing shrinks with the simplex's longest edge.  A
simplex certifies when every mapped point has worst-case dynamics pointed
inward with margin at least (longest edge) * 2^-m * lipschitz: the margin
buys invariance on the whole ball around each test point, and the lattice
balls cover the simplex.

Violation counts are summarized as an NTP ratio (number-of-test-points
ratio): the fraction of finest-level points that miss the margin.  Zero NTP
certifies the simplex.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import SystemModel, support_value
from .errors import (
    CapacityExceededError,
    DegenerateSimplexError,
    NonFiniteDriftError,
)
from .simplicial import (
    BoundaryComplex,
    cofactor_normals,
    degeneracy_floor,
    longest_edge,
    normal_vector,
)

MAX_VIOLATING_POINTS = 64
DEFAULT_POINT_BUDGET = 5_000_000


@dataclass(frozen=True)
class RefinementSchedule:
    """Geometric spacing schedule s[m] = 2^-m for m = 0..m_max."""

    m_max: int

    @property
    def s(self) -> tuple:
        return tuple(2.0 ** -m for m in range(self.m_max + 1))


def _compositions(total: int, parts: int):
    """Nonnegative integer tuples of the given length summing to total,
    in ascending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def lattice_size(n: int, m: int) -> int:
    """Number of level-m lattice points on the standard simplex in R^n."""
    k = 2 ** m
    return math.comb(k + n - 1, k)


class TestLattice:
    """Precomputed reference-simplex lattices for levels 0..m_max.

    ``matrix(m)`` returns the (L_m, n) array whose rows are barycentric
    weight vectors: nonnegative multiples of 2^-m summing to one.  Row order
    is ascending lexicographic, so lattices are reproducible.
    """

    def __init__(self, n: int, m_max: int, budget: int = DEFAULT_POINT_BUDGET):
        if n < 2:
            raise ValueError("ambient dimension must be at least 2")
        if m_max < 0:
            raise ValueError("m_max must be nonnegative")
        if lattice_size(n, m_max) > budget:
            raise CapacityExceededError(
                f"level {m_max} lattice in R^{n} has {lattice_size(n, m_max)} "
                f"points, over the budget of {budget}")
        self.n = n
        self.m_max = m_max
        self.schedule = RefinementSchedule(m_max)
        self._matrices = []
        for m in range(m_max + 1):
            k = 2 ** m
            rows = np.array(list(_compositions(k, n)), dtype=float)
            self._matrices.append(rows * (2.0 ** -m))

    def matrix(self, m: int) -> np.ndarray:
        return self._matrices[m]

    def count(self, m: int) -> int:
        return self._matrices[m].shape[0]


@lru_cache(maxsize=32)
def build_lattice(n: int, m_max: int, budget: int = DEFAULT_POINT_BUDGET) -> TestLattice:
    """Build (or fetch the cached) lattice family for an ambient dimension."""
    return TestLattice(n, m_max, budget)


def map_lattice(lat: TestLattice, m: int, c: BoundaryComplex, si: int) -> np.ndarray:
    """Map the level-m reference lattice onto boundary simplex ``si``.

    Each output row is the convex combination of the simplex vertices with
    the reference row's weights, so all points land on the simplex.
    """
    vc = c.simplex_coords(si)
    if vc.shape[0] != lat.n:
        raise ValueError("lattice dimension does not match the simplex")
    if np.linalg.norm(cofactor_normals(vc)) <= degeneracy_floor(vc):
        raise DegenerateSimplexError(f"simplex {si} is degenerate")
    return lat.matrix(m) @ vc


@dataclass(frozen=True)
class SimplexVerdict:
    """Result of certifying one simplex.

    ``ntp_ratio`` is zero exactly when the simplex passed at some level, in
    which case ``passed_at_level`` holds that level.  When the simplex fails
    every level, up to MAX_VIOLATING_POINTS finest-level offenders are kept
    for reporting.
    """

    ntp_ratio: float
    passed_at_level: int | None = None
    violating_points: np.ndarray | None = None

    @property
    def certified(self) -> bool:
        return self.passed_at_level is not None


def certify_simplex(c: BoundaryComplex, si: int, sys: SystemModel,
                    lat: TestLattice, m_max: int | None = None) -> SimplexVerdict:
    """Decide whether one boundary simplex is invariant for the system.

    Runs the margin test level by level; the first all-clear level certifies
    the simplex.  Otherwise the returned NTP ratio counts finest-level
    violations.
    """
    if sys.lipschitz is None:
        raise ValueError("system has no Lipschitz constant attached")
    if m_max is None:
        m_max = lat.m_max
    if m_max > lat.m_max:
        raise ValueError("m_max exceeds the precomputed lattice levels")
    vc = c.simplex_coords(si)
    r = longest_edge(vc)
    normal = normal_vector(c, si)
    shift = support_value(sys.noise, normal)
    ell = sys.lipschitz

    violations = None
    points = None
    for m in range(m_max + 1):
        points = lat.matrix(m) @ vc
        values = np.asarray(sys.drift(points), dtype=float) @ normal + shift
        if not np.all(np.isfinite(values)):
            raise NonFiniteDriftError(f"drift not finite on simplex {si}")
        violations = values > -r * (2.0 ** -m) * ell
        if not violations.any():
            return SimplexVerdict(0.0, passed_at_level=m)
    count = int(violations.sum())
    offenders = points[violations][:MAX_VIOLATING_POINTS].copy()
    return SimplexVerdict(count / lat.count(m_max), violating_points=offenders)


def total_ntp(c: BoundaryComplex, sys: SystemModel, lat: TestLattice,
              m_max: int | None = None, subset=None, threads: int = 1,
              verdicts: dict | None = None) -> float:
    """Sum of NTP ratios over a subset of simplices (default all).

    Zero exactly when every tested simplex certifies.  When ``verdicts`` is
    given, per-simplex verdicts are stored there keyed by simplex index.
    """
    if subset is None:
        subset = range(c.num_simplices)
    indices = [int(i) for i in subset]

    def one(i):
        return certify_simplex(c, i, sys, lat, m_max)

    if threads > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, indices))
    else:
        results = [one(i) for i in indices]
    if verdicts is not None:
        verdicts.update(zip(indices, results))
    # reduce in index order so the result does not depend on scheduling
    return float(np.sum([v.ntp_ratio for v in results]))
