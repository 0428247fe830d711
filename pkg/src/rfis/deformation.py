"""Ray-constrained vertex moves and the invariant-set search loop.

A move pulls one vertex toward (or pushes it away from) the center along its
ray by the factor alpha; it is kept when it strictly lowers the violation
count over the vertex's closed star, or leaves it at zero.  Vertices are
swept repeatedly until a whole sweep makes no progress, the complex is
subdivided, and the process repeats for a fixed number of rounds.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SystemModel
from .errors import BudgetExceededError, DegenerateSimplexError, SweepFuseError
from .invariance import TestLattice, build_lattice, certify_simplex, total_ntp
from .simplicial import (
    BoundaryComplex,
    barycentric_subdivision,
    centroidal_subdivision,
    cofactor_normals,
    closed_star,
    degeneracy_floor,
    enclosed_volume,
)

log = logging.getLogger("rfis")

DEFAULT_SIMPLEX_BUDGET = 100_000
SWEEP_FUSE = 10_000


@dataclass(frozen=True)
class DeformationConfig:
    """Parameters of one deformation run.

    alpha < 1 shrinks the polytope toward the center, alpha > 1 grows it.
    ``t_max`` counts sweep-then-subdivide rounds; ``m_max`` is the finest
    certification level.  ``min_move`` (a fraction of the initial complex
    diameter) stops vertices whose next displacement would be smaller; without
    it, systems whose minimal invariant set is a point off-center can grind a
    vertex toward the center indefinitely.
    """

    alpha: float
    center: np.ndarray
    m_max: int = 8
    t_max: int = 6
    subdivision: str = "barycentric"      # or "centroidal"
    max_simplices: int = DEFAULT_SIMPLEX_BUDGET
    sweep_fuse: int = SWEEP_FUSE
    min_move: float = 1e-5
    threads: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.alpha == 1.0:
            raise ValueError("alpha must differ from 1")
        if self.subdivision not in ("barycentric", "centroidal"):
            raise ValueError("subdivision must be 'barycentric' or 'centroidal'")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


@dataclass
class IterationRecord:
    iteration: int
    wall_time_s: float
    volume: float
    total_ntp: float


@dataclass
class AcceptEvent:
    """One kept vertex move, with the star sums that justified keeping it."""

    iteration: int
    sweep: int
    vertex: int
    ntp_before: float
    ntp_after: float


@dataclass
class RunSequence:
    """Stored complexes and bookkeeping of one deformation run."""

    complexes: list[BoundaryComplex]
    records: list[IterationRecord]
    rfis_found: bool
    trace: list[AcceptEvent] = field(default_factory=list)

    @property
    def final(self) -> BoundaryComplex:
        return self.complexes[-1]

    def volumes(self) -> list[float]:
        return [r.volume for r in self.records]


def vertex_map(c: BoundaryComplex, j: int, alpha: float,
               center=None) -> BoundaryComplex:
    """Move vertex ``j`` along its center ray by the factor ``alpha``.

    Returns a new complex sharing everything but the coordinate table.
    Raises DegenerateSimplexError when the move flattens a star simplex; the
    caller is expected to discard the move in that case.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if center is None:
        center = c.center
    center = np.asarray(center, dtype=float)
    coords = c.coords.copy()
    coords[j] = (1.0 - alpha) * center + alpha * c.coords[j]
    moved = c.replace_coords(coords)
    for si in closed_star(moved, j):
        vc = moved.simplex_coords(si)
        if np.linalg.norm(cofactor_normals(vc)) <= degeneracy_floor(vc):
            raise DegenerateSimplexError(
                f"moving vertex {j} collapses simplex {si}")
    return moved


def keep_perturbation(ntp_before: float, ntp_after: float) -> bool:
    """Literal keep rule: the star sum strictly improves, or lands at zero."""
    return ntp_after < ntp_before or ntp_after == 0.0


def keep_or_discard(before: BoundaryComplex, after: BoundaryComplex, j: int,
                    sys: SystemModel, lat: TestLattice,
                    m_max: int | None = None) -> bool:
    """Stateless keep test over the closed star of the moved vertex."""
    star = closed_star(before, j)
    try:
        s_after = total_ntp(after, sys, lat, m_max, subset=star)
    except DegenerateSimplexError:
        return False
    s_before = total_ntp(before, sys, lat, m_max, subset=star)
    return keep_perturbation(s_before, s_after)


def volume_delta_check(before: BoundaryComplex, after: BoundaryComplex,
                       j: int, alpha: float, rtol: float = 1e-9) -> bool:
    """Verify the cone-scaling law of a single vertex move.

    Moving a vertex scales each cone over its star by alpha, so the enclosed
    volume must change by exactly (1 - alpha) times the star cone volume.
    """
    star = closed_star(before, j)
    rel = before.coords[before.simplices[star]] - before.center
    star_vol = float(np.abs(np.linalg.det(rel)).sum() / math.factorial(before.dim))
    expected = enclosed_volume(before) - (1.0 - alpha) * star_vol
    actual = enclosed_volume(after)
    scale = max(abs(expected), abs(actual), 1e-300)
    return abs(actual - expected) / scale <= rtol


class _NtpCache:
    """Per-simplex verdict cache kept current across a sweep phase."""

    def __init__(self, c, sys, lat, m_max):
        self.c = c
        self.sys = sys
        self.lat = lat
        self.m_max = m_max
        self.values: dict[int, float] = {}

    def star_sum(self, star) -> float:
        total = 0.0
        for si in star:
            si = int(si)
            if si not in self.values:
                v = certify_simplex(self.c, si, self.sys, self.lat, self.m_max)
                self.values[si] = v.ntp_ratio
            total += self.values[si]
        return total

    def accept(self, moved, star, after_values):
        self.c = moved
        for si, val in zip(star, after_values):
            self.values[int(si)] = val

    def full_sum(self) -> float:
        return self.star_sum(range(self.c.num_simplices))


def _sweep_phase(c, sys, lat, cfg, cache, iteration, trace, min_move_abs):
    """Sweep all vertices until one full sweep keeps nothing."""
    sweep = 0
    while True:
        sweep += 1
        if sweep > cfg.sweep_fuse:
            raise SweepFuseError(
                f"iteration {iteration}: no quiescent sweep within "
                f"{cfg.sweep_fuse} sweeps")
        any_kept = False
        for j in range(c.num_vertices):
            displacement = abs(1.0 - cfg.alpha) * np.linalg.norm(
                c.coords[j] - cfg.center)
            if displacement < min_move_abs:
                continue
            try:
                moved = vertex_map(c, j, cfg.alpha, cfg.center)
            except DegenerateSimplexError:
                continue
            star = closed_star(c, j)
            s_before = cache.star_sum(star)
            after_values = []
            try:
                for si in star:
                    v = certify_simplex(moved, int(si), sys, lat, cfg.m_max)
                    after_values.append(v.ntp_ratio)
            except DegenerateSimplexError:
                continue
            s_after = float(np.sum(after_values))
            if keep_perturbation(s_before, s_after):
                c = moved
                cache.accept(moved, star, after_values)
                any_kept = True
                if trace is not None:
                    trace.append(AcceptEvent(iteration, sweep, j, s_before, s_after))
        if not any_kept:
            return c, sweep


def run_deformation(sys: SystemModel, initial: BoundaryComplex,
                    cfg: DeformationConfig, collect_trace: bool = False) -> RunSequence:
    """Deform ``initial`` into a sequence of candidate invariant sets.

    Stores the complex after each sweep round; the run certifies when the
    final stored complex has zero total NTP.  Raises BudgetExceededError when
    the simplex count would pass the configured cap.
    """
    if sys.lipschitz is None:
        raise ValueError("system has no Lipschitz constant attached")
    if not np.allclose(cfg.center, initial.center):
        raise ValueError("config center must match the complex center")
    if initial.num_simplices > cfg.max_simplices:
        raise BudgetExceededError(
            f"initial complex has {initial.num_simplices} simplices, over the "
            f"cap of {cfg.max_simplices}")

    lat = build_lattice(initial.dim, cfg.m_max)
    trace: list[AcceptEvent] | None = [] if collect_trace else None

    cache = _NtpCache(initial, sys, lat, cfg.m_max)
    records = [IterationRecord(0, 0.0, enclosed_volume(initial), cache.full_sum())]
    complexes = [initial]
    c = initial

    subdivide = (barycentric_subdivision if cfg.subdivision == "barycentric"
                 else centroidal_subdivision)
    min_move_abs = cfg.min_move * initial.diameter()

    for t in range(1, cfg.t_max + 1):
        tic = time.perf_counter()
        c, sweeps = _sweep_phase(c, sys, lat, cfg, cache, t, trace, min_move_abs)
        wall = time.perf_counter() - tic
        vol = enclosed_volume(c)
        ntp = cache.full_sum()
        records.append(IterationRecord(t, wall, vol, ntp))
        complexes.append(c)
        log.info("iteration %d: %d sweeps, volume %.6g, ntp %.6g",
                 t, sweeps, vol, ntp)
        if t < cfg.t_max:
            grown = c.num_simplices * _children_per_simplex(c.dim, cfg.subdivision)
            if grown > cfg.max_simplices:
                raise BudgetExceededError(
                    f"subdividing would give {grown} simplices, over the cap "
                    f"of {cfg.max_simplices}")
            c = subdivide(c)
            cache = _NtpCache(c, sys, lat, cfg.m_max)

    final_ntp = total_ntp(complexes[-1], sys, lat, cfg.m_max, threads=cfg.threads)
    records[-1].total_ntp = final_ntp
    rfis_found = final_ntp == 0.0
    if not rfis_found:
        log.warning("RFIS Not Found (final total NTP %.6g)", final_ntp)
    return RunSequence(complexes, records, rfis_found,
                       trace if trace is not None else [])


def _children_per_simplex(n: int, kind: str) -> int:
    return math.factorial(n) if kind == "barycentric" else n
