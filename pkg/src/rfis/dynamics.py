"""Disturbed system models and worst-case boundary evaluations.

A system is a drift field f together with a bounded additive noise set, so
the dynamics are x' in f(x) + noise.  The certifier only ever needs the
worst-case inner product of the dynamics with a fixed direction, which for
additive noise splits into the drift term plus the noise support function.

Drift callables are vectorized: they map an (..., n) array of states to an
(..., n) array of velocities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EmptySetError,
    NonFiniteDriftError,
    UnknownSystemError,
)

# -- noise sets ----------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    """The singleton set {0}: no disturbance."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lower, upper] of disturbance values."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be equal-length vectors")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", tuple(lo.tolist()))
        object.__setattr__(self, "upper", tuple(hi.tolist()))


@dataclass(frozen=True)
class VertexPolytope:
    """Convex hull of a finite list of disturbance vertices."""

    points: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("vertex polytope needs a non-empty (k, n) point list")
        if not np.all(np.isfinite(pts)):
            raise ValueError("vertex polytope points must be finite")
        object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))


NoiseSet = Zero | Box | VertexPolytope


def support_value(noise: NoiseSet, direction) -> float:
    """sup over the noise set of <noise, direction>."""
    d = np.asarray(direction, dtype=float)
    if isinstance(noise, Zero):
        return 0.0
    if isinstance(noise, Box):
        lo = np.asarray(noise.lower)
        hi = np.asarray(noise.upper)
        return float(np.maximum(lo * d, hi * d).sum())
    verts = np.asarray(noise.points)
    return float((verts @ d).max())


def noise_vertices(noise: NoiseSet, dim: int) -> np.ndarray:
    """Extreme points of the noise set (box corners, the origin for Zero)."""
    if isinstance(noise, Zero):
        return np.zeros((1, dim))
    if isinstance(noise, Box):
        lo = np.asarray(noise.lower)
        hi = np.asarray(noise.upper)
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij"))
        return corners.reshape(dim, -1).T
    return np.asarray(noise.points)


# -- system model ----------------------------------------------------------------


@dataclass(frozen=True)
class SystemModel:
    """Drift field with Lipschitz constant and a bounded additive noise set.

    ``lipschitz`` may be None on a freshly built model; the certifier
    requires it, and :func:`estimate_lipschitz` provides a default.
    """

    dimension: int
    drift: Callable[[np.ndarray], np.ndarray]
    noise: NoiseSet = field(default_factory=Zero)
    lipschitz: float | None = None
    name: str = "custom"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.lipschitz is not None and not self.lipschitz > 0:
            raise ValueError("lipschitz constant must be positive")

    def with_lipschitz(self, ell: float) -> "SystemModel":
        return replace(self, lipschitz=float(ell))

    def with_noise(self, noise: NoiseSet) -> "SystemModel":
        return replace(self, noise=noise)


def eval_drift(sys: SystemModel, x) -> np.ndarray:
    """Evaluate the drift with shape and finiteness checks."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(sys.drift(x), dtype=float)
    if out.shape != x.shape:
        raise NonFiniteDriftError(
            f"drift returned shape {out.shape} for input shape {x.shape}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteDriftError("drift returned NaN or infinity")
    return out


def worst_case_inner_product(sys: SystemModel, x, normal) -> float:
    """sup over admissible disturbances of <f(x) + noise, normal>."""
    n = np.asarray(normal, dtype=float)
    f = eval_drift(sys, np.asarray(x, dtype=float))
    return float(f @ n) + support_value(sys.noise, n)


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point sets."""
    A = np.atleast_2d(np.asarray(a, dtype=float))
    B = np.atleast_2d(np.asarray(b, dtype=float))
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptySetError("hausdorff distance of an empty set")
    from scipy.spatial.distance import cdist

    d = cdist(A, B)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def estimate_lipschitz(sys: SystemModel, lower, upper,
                       points_per_axis: int = 20, safety: float = 1.2) -> float:
    """Certified-leaning Lipschitz estimate of the drift over a box.

    Samples a dense grid, takes the spectral norm of the central-difference
    Jacobian at every grid point, and inflates the maximum by ``safety``.
    For additive noise the set-valued dynamics inherit exactly this
    constant.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    n = sys.dimension
    axes = [np.linspace(lo[i], hi[i], points_per_axis) for i in range(n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    span = np.maximum(hi - lo, 1.0)
    jac = np.empty((grid.shape[0], n, n))
    for j in range(n):
        h = 1e-6 * span[j]
        step = np.zeros(n)
        step[j] = h
        fp = eval_drift(sys, grid + step)
        fm = eval_drift(sys, grid - step)
        jac[:, :, j] = (fp - fm) / (2 * h)
    norms = np.linalg.norm(jac, ord=2, axis=(1, 2))
    return float(safety * norms.max())


# -- disturbance signals ----------------------------------------------------------


@dataclass(frozen=True)
class ConstantSignal:
    """Disturbance frozen at one admissible value."""

    value: tuple

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        v = np.asarray(self.value)
        return np.broadcast_to(v, t.shape + v.shape).copy()


@dataclass(frozen=True)
class SinusoidSignal:
    """Per-component sums of sinusoids.

    ``components[i]`` is a sequence of (amplitude, angular_frequency, phase)
    triples; component i of the signal is the sum of
    amplitude * sin(angular_frequency * t + phase) over its triples.
    """

    components: tuple

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (len(self.components),))
        for i, terms in enumerate(self.components):
            for amp, omega, phase in terms:
                out[..., i] += amp * np.sin(omega * t + phase)
        return out


@dataclass(frozen=True)
class VertexSwitchSignal:
    """Piecewise-constant signal cycling through noise-set vertices."""

    period: float
    vertices: tuple

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        verts = np.asarray(self.vertices)
        idx = (np.floor_divide(t, self.period)).astype(int) % len(verts)
        return verts[idx]


DisturbanceSignal = ConstantSignal | SinusoidSignal | VertexSwitchSignal


def zero_signal(dim: int) -> ConstantSignal:
    return ConstantSignal(tuple([0.0] * dim))


def validate_signal(signal: DisturbanceSignal, noise: NoiseSet,
                    horizon: float, samples: int = 10_000) -> None:
    """Check by sampling that the signal stays inside the noise set."""
    t = np.linspace(0.0, horizon, samples)
    values = np.asarray(signal(t), dtype=float)
    tol = 1e-9
    if isinstance(noise, Zero):
        if np.abs(values).max() > tol:
            raise ValueError("signal is nonzero but the noise set is {0}")
        return
    if isinstance(noise, Box):
        lo = np.asarray(noise.lower) - tol
        hi = np.asarray(noise.upper) + tol
        if np.any(values < lo) or np.any(values > hi):
            raise ValueError("signal leaves the noise box")
        return
    verts = np.asarray(noise.points)
    from scipy.optimize import linprog

    unique = np.unique(np.round(values, 12), axis=0)
    k = verts.shape[0]
    for v in unique:
        res = linprog(c=np.zeros(k),
                      A_eq=np.vstack([verts.T, np.ones(k)]),
                      b_eq=np.append(v, 1.0),
                      bounds=[(0, None)] * k, method="highs")
        if not res.success:
            raise ValueError("signal leaves the vertex-polytope noise set")


# -- benchmark registry ----------------------------------------------------------


def _vdp(mu: float):
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = x[..., 1]
        out[..., 1] = mu * (1.0 - x[..., 0] ** 2) * x[..., 1] - x[..., 0]
        return out
    return drift


def _fitzhugh():
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = x[..., 0] - x[..., 0] ** 3 / 3.0 - x[..., 1] + 7.0 / 8.0
        out[..., 1] = 0.08 * (x[..., 0] + 0.7 - 0.8 * x[..., 1])
        return out
    return drift


def _curve_tracking(rho: float, mu: float):
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = -np.sin(x[..., 1])
        out[..., 1] = (x[..., 0] - rho) * np.cos(x[..., 1]) - mu * np.sin(x[..., 1])
        return out
    return drift


def _reversed_vdp():
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = -x[..., 1]
        out[..., 1] = x[..., 0] - x[..., 1] + x[..., 1] ** 3
        return out
    return drift


def _phytoplankton():
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = 1.0 - x[..., 0] - 0.25 * x[..., 0] * x[..., 1]
        out[..., 1] = (2.0 * x[..., 2] - 1.0) * x[..., 1]
        out[..., 2] = 0.25 * x[..., 0] - 2.0 * x[..., 2] ** 2
        return out
    return drift


def _thomas(b: float):
    def drift(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = np.sin(x[..., 1]) - b * x[..., 0]
        out[..., 1] = np.sin(x[..., 2]) - b * x[..., 1]
        out[..., 2] = np.sin(x[..., 0]) - b * x[..., 2]
        return out
    return drift


# Declared curve-tracking noise keeps the first component pinned at zero; the
# second component's half width defaults to 0.15 and can be overridden.
CURVE_TRACKING_NU2 = 0.15


def benchmark(name: str, **params) -> SystemModel:
    """Build one of the bundled benchmark systems by string id.

    Supported ids: vdp(mu), fitzhugh, curve_tracking(rho, mu, nu2),
    reversed_vdp, phytoplankton, thomas(b).  The returned model has no
    Lipschitz constant yet; attach one with ``with_lipschitz`` or
    :func:`estimate_lipschitz`.
    """
    if name == "vdp":
        mu = float(params.pop("mu", 1.0))
        model = SystemModel(2, _vdp(mu), Zero(), name=f"vdp(mu={mu})")
    elif name == "fitzhugh":
        model = SystemModel(2, _fitzhugh(), Zero(), name="fitzhugh")
    elif name == "curve_tracking":
        rho = float(params.pop("rho", 1.0))
        mu = float(params.pop("mu", 6.42))
        nu2 = float(params.pop("nu2", CURVE_TRACKING_NU2))
        noise = Box((0.0, -nu2), (0.0, nu2))
        model = SystemModel(2, _curve_tracking(rho, mu), noise,
                            name=f"curve_tracking(rho={rho},mu={mu})")
    elif name == "reversed_vdp":
        noise = Box((-0.03, -0.03), (0.03, 0.03))
        model = SystemModel(2, _reversed_vdp(), noise, name="reversed_vdp")
    elif name == "phytoplankton":
        model = SystemModel(3, _phytoplankton(), Zero(), name="phytoplankton")
    elif name == "thomas":
        b = float(params.pop("b", 0.3))
        model = SystemModel(3, _thomas(b), Zero(), name=f"thomas(b={b})")
    else:
        raise UnknownSystemError(f"no benchmark named {name!r}")
    if params:
        raise UnknownSystemError(
            f"unknown parameters for {name}: {sorted(params)}")
    return model


def linear_system(matrix, noise: NoiseSet | None = None,
                  name: str = "linear") -> SystemModel:
    """Model x' = A x; its exact Lipschitz constant is the spectral norm."""
    A = np.asarray(matrix, dtype=float)

    def drift(x):
        return np.asarray(x, dtype=float) @ A.T

    ell = float(np.linalg.norm(A, ord=2))
    return SystemModel(A.shape[0], drift, noise or Zero(),
                       lipschitz=max(ell, math.ulp(1.0)), name=name)
