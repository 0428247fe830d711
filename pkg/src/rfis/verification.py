"""Trajectory falsifier: integrate disturbed trajectories from boundary
seeds and look for escapes from a candidate invariant set.

Integration is classical fixed-step fourth-order Runge-Kutta on
x' = f(x) + signal(t).  A trajectory escapes when some sample classifies
outside the boundary by more than the penetration tolerance, which defaults
to a small multiple of the set diameter to absorb integration error grazing
a genuinely invariant boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import DisturbanceSignal, SystemModel, validate_signal, zero_signal
from .invariance import TestLattice, build_lattice, map_lattice
from .simplicial import BoundaryComplex, classify_points

PENETRATION_DIAMETER_FACTOR = 1e-6


@dataclass(frozen=True)
class LatticeSeeds:
    """Seed at every mapped lattice point of the given level."""

    level: int = 1


@dataclass(frozen=True)
class RandomBoundarySeeds:
    """Seed at k boundary points drawn with a fixed RNG seed."""

    count: int
    rng_seed: int = 0


SeedRule = LatticeSeeds | RandomBoundarySeeds


@dataclass
class SimulationConfig:
    step: float = 1e-3
    horizon: float = 50.0
    seeds: object = None                 # explicit (k, n) array or a SeedRule
    disturbance: DisturbanceSignal | None = None
    penetration_tol: float | None = None

    def __post_init__(self):
        if not 0 < self.step <= self.horizon:
            raise ValueError("need 0 < step <= horizon")


@dataclass
class TrajectoryRecord:
    seed: np.ndarray
    times: np.ndarray
    states: np.ndarray
    escaped: bool
    first_escape_time: float | None
    max_penetration: float


@dataclass
class FalsifyReport:
    n_trajectories: int
    n_escapes: int
    worst_penetration: float
    n_blowups: int = 0
    records: list[TrajectoryRecord] = field(default_factory=list)


def rk4_step(sys: SystemModel, signal, t: float, states: np.ndarray,
             h: float) -> np.ndarray:
    """One RK4 step applied to a whole batch of states."""
    nu0 = signal(np.asarray(t))
    nu_half = signal(np.asarray(t + 0.5 * h))
    nu1 = signal(np.asarray(t + h))
    k1 = sys.drift(states) + nu0
    k2 = sys.drift(states + 0.5 * h * k1) + nu_half
    k3 = sys.drift(states + 0.5 * h * k2) + nu_half
    k4 = sys.drift(states + h * k3) + nu1
    return states + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_batch(sys: SystemModel, seeds: np.ndarray,
                    signal: DisturbanceSignal, step: float,
                    horizon: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate many seeds under one disturbance signal.

    Returns (times, states) with states of shape (T+1, k, n).  Trajectories
    that blow up keep NaN from the first bad step on; the batch continues.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    n_steps = int(round(horizon / step))
    times = step * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, seeds.shape[0], seeds.shape[1]))
    states[0] = seeds
    x = seeds.copy()
    with np.errstate(all="ignore"):
        for i in range(n_steps):
            x = rk4_step(sys, signal, times[i], x, step)
            states[i + 1] = x
    return times, states


def integrate(sys: SystemModel, seed, signal: DisturbanceSignal | None,
              step: float, horizon: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a single seed; returns (times, states) with states (T+1, n)."""
    if signal is None:
        signal = zero_signal(sys.dimension)
    times, states = integrate_batch(sys, np.asarray(seed)[None, :], signal,
                                    step, horizon)
    return times, states[:, 0, :]


def resolve_seeds(c: BoundaryComplex, seeds) -> np.ndarray:
    """Turn a seed specification into a concrete (k, n) array of points."""
    if isinstance(seeds, LatticeSeeds):
        lat = build_lattice(c.dim, max(seeds.level, 1))
        pts = [map_lattice(lat, seeds.level, c, si) for si in range(c.num_simplices)]
        return np.unique(np.round(np.vstack(pts), 12), axis=0)
    if isinstance(seeds, RandomBoundarySeeds):
        rng = np.random.default_rng(seeds.rng_seed)
        sel = rng.integers(0, c.num_simplices, size=seeds.count)
        weights = rng.dirichlet(np.ones(c.dim), size=seeds.count)
        return np.einsum("ki,kij->kj", weights, c.coords[c.simplices[sel]])
    return np.atleast_2d(np.asarray(seeds, dtype=float))


def falsify(c: BoundaryComplex, sys: SystemModel,
            simcfg: SimulationConfig, keep_samples: bool = False) -> FalsifyReport:
    """Integrate all seeds under the configured disturbance and count escapes.

    Raises ValueError when the signal leaves the noise set or a seed starts
    outside the boundary.
    """
    signal = simcfg.disturbance or zero_signal(sys.dimension)
    validate_signal(signal, sys.noise, simcfg.horizon)
    seeds = resolve_seeds(c, simcfg.seeds)

    tol = simcfg.penetration_tol
    if tol is None:
        tol = PENETRATION_DIAMETER_FACTOR * c.diameter()
    labels, pen0 = classify_points(c, seeds)
    if np.any(pen0 > tol):
        raise ValueError("a seed starts outside the candidate set")

    times, states = integrate_batch(sys, seeds, signal, simcfg.step,
                                    simcfg.horizon)
    n_t, n_k, n = states.shape
    flat = states.reshape(-1, n)
    # huge pre-blowup samples would overflow the ray cast; they are escapes
    finite = np.all(np.abs(flat) < 1e100, axis=1)
    pen_flat = np.full(flat.shape[0], np.inf)
    if finite.any():
        _, pen_ok = classify_points(c, flat[finite])
        pen_flat[finite] = pen_ok
    pen = pen_flat.reshape(n_t, n_k)
    finite_traj = finite.reshape(n_t, n_k)

    records = []
    n_escapes = 0
    n_blowups = 0
    worst = -np.inf
    for k in range(n_k):
        blowup = not finite_traj[:, k].all()
        if blowup:
            n_blowups += 1
        over = pen[:, k] > tol
        escaped = bool(over.any())
        first = float(times[int(np.argmax(over))]) if escaped else None
        max_pen = float(pen[:, k].max())
        worst = max(worst, max_pen)
        if escaped:
            n_escapes += 1
        records.append(TrajectoryRecord(
            seed=seeds[k],
            times=times if keep_samples else times[:0],
            states=states[:, k, :] if keep_samples else states[:0, k, :],
            escaped=escaped,
            first_escape_time=first,
            max_penetration=max_pen,
        ))
    return FalsifyReport(n_k, n_escapes, float(worst), n_blowups, records)
