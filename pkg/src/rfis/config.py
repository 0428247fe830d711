"""Run configuration: JSON schema, validation and object construction.

A run config is a single JSON object, for example::

    {
      "schema": 1,
      "system": "vdp",
      "mu": 1.0,
      "alpha": 0.98,
      "center": [0, 0],
      "t_max": 6,
      "m_max": 8,
      "lipschitz": "estimate",
      "initial": {"cube": 3.0},
      "subdivision": "barycentric",
      "budgets": {"max_simplices": 100000, "sweep_fuse": 10000}
    }

Recognized bare keys (mu, rho, b, nu2) are folded into the system
parameters; ``initial`` takes one of ``cube``, ``regular_polygon``,
``vertices`` or ``from_file``.  Every error names the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .deformation import DEFAULT_SIMPLEX_BUDGET, SWEEP_FUSE, DeformationConfig
from .dynamics import (
    Box,
    SystemModel,
    VertexPolytope,
    Zero,
    benchmark,
    estimate_lipschitz,
)
from .errors import (
    CenterOutsideError,
    ParseError,
    UnknownSystemError,
    ValidationError,
)
from .meshio import read_cplx
from .simplicial import (
    BoundaryComplex,
    Containment,
    containment,
    cube_complex,
    regular_polygon,
    triangulate_convex_polytope,
)

_SYSTEM_PARAM_KEYS = ("mu", "rho", "b", "nu2")
_LIPSCHITZ_INFLATION = 1.1


@dataclass
class RunConfig:
    system: str
    params: dict
    alpha: float
    center: np.ndarray | None
    t_max: int
    m_max: int = 8
    lipschitz: str | float = "estimate"
    initial: dict = field(default_factory=dict)
    subdivision: str = "barycentric"
    noise: dict | None = None
    max_simplices: int = DEFAULT_SIMPLEX_BUDGET
    sweep_fuse: int = SWEEP_FUSE
    min_move: float = 1e-5
    threads: int = 1
    output_dir: str | None = None


def _require(raw: dict, key: str):
    if key not in raw:
        raise ValidationError(key, "required field is missing")
    return raw[key]


def _vector(value, key: str) -> np.ndarray:
    try:
        vec = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(key, "must be a list of numbers") from None
    if vec.ndim != 1 or not np.all(np.isfinite(vec)):
        raise ValidationError(key, "must be a finite vector")
    return vec


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run config file."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object")
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    schema = raw.get("schema", 1)
    if schema != 1:
        raise ValidationError("schema", f"unsupported schema version {schema!r}")

    system = _require(raw, "system")
    if not isinstance(system, str):
        raise ValidationError("system", "must be a string id")
    params = dict(raw.get("params", {}))
    for key in _SYSTEM_PARAM_KEYS:
        if key in raw:
            params[key] = raw[key]

    alpha = _require(raw, "alpha")
    if not isinstance(alpha, (int, float)) or not alpha > 0 or alpha == 1:
        raise ValidationError("alpha", "must be a positive number different from 1")

    center = _vector(raw["center"], "center") if "center" in raw else None

    t_max = _require(raw, "t_max")
    if not isinstance(t_max, int) or t_max < 0:
        raise ValidationError("t_max", "must be a nonnegative integer")
    m_max = raw.get("m_max", 8)
    if not isinstance(m_max, int) or m_max < 0:
        raise ValidationError("m_max", "must be a nonnegative integer")

    lipschitz = raw.get("lipschitz", "estimate")
    if lipschitz != "estimate":
        if not isinstance(lipschitz, (int, float)) or not lipschitz > 0:
            raise ValidationError("lipschitz", "must be 'estimate' or a positive number")

    initial = raw.get("initial", raw.get("initial_polytope"))
    if not isinstance(initial, dict) or len(initial) != 1:
        raise ValidationError("initial", "must be an object with exactly one of "
                              "cube/regular_polygon/vertices/from_file")
    kind = next(iter(initial))
    if kind not in ("cube", "regular_polygon", "vertices", "from_file"):
        raise ValidationError("initial", f"unknown initial polytope kind {kind!r}")

    subdivision = raw.get("subdivision", "barycentric")
    if subdivision not in ("barycentric", "centroidal"):
        raise ValidationError("subdivision", "must be 'barycentric' or 'centroidal'")

    noise = raw.get("noise")
    if noise is not None and not isinstance(noise, dict):
        raise ValidationError("noise", "must be an object")

    budgets = raw.get("budgets", {})
    if not isinstance(budgets, dict):
        raise ValidationError("budgets", "must be an object")
    max_simplices = budgets.get("max_simplices", DEFAULT_SIMPLEX_BUDGET)
    sweep_fuse = budgets.get("sweep_fuse", SWEEP_FUSE)
    min_move = budgets.get("min_move", 1e-5)
    if not isinstance(max_simplices, int) or max_simplices <= 0:
        raise ValidationError("budgets.max_simplices", "must be a positive integer")
    if not isinstance(sweep_fuse, int) or sweep_fuse <= 0:
        raise ValidationError("budgets.sweep_fuse", "must be a positive integer")
    if not isinstance(min_move, (int, float)) or min_move < 0:
        raise ValidationError("budgets.min_move", "must be a nonnegative number")

    threads = raw.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        raise ValidationError("threads", "must be a positive integer")

    return RunConfig(
        system=system, params=params, alpha=float(alpha), center=center,
        t_max=t_max, m_max=m_max, lipschitz=lipschitz, initial=initial,
        subdivision=subdivision, noise=noise, max_simplices=max_simplices,
        sweep_fuse=sweep_fuse, min_move=float(min_move), threads=threads,
        output_dir=raw.get("output_dir"),
    )


def build_noise(spec: dict):
    kind = spec.get("kind")
    if kind == "zero":
        return Zero()
    if kind == "box":
        try:
            return Box(tuple(spec["lower"]), tuple(spec["upper"]))
        except (KeyError, ValueError) as exc:
            raise ValidationError("noise", str(exc)) from exc
    if kind == "vertices":
        try:
            return VertexPolytope(tuple(map(tuple, spec["points"])))
        except (KeyError, ValueError) as exc:
            raise ValidationError("noise", str(exc)) from exc
    raise ValidationError("noise.kind", "must be zero, box or vertices")


def build_system(cfg: RunConfig) -> SystemModel:
    try:
        model = benchmark(cfg.system, **cfg.params)
    except UnknownSystemError as exc:
        raise ValidationError("system", str(exc)) from exc
    if cfg.noise is not None:
        model = model.with_noise(build_noise(cfg.noise))
    return model


def build_initial(cfg: RunConfig, base_dir: Path | None = None) -> BoundaryComplex:
    kind, value = next(iter(cfg.initial.items()))
    if kind == "from_file":
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        c = read_cplx(path)
        if cfg.center is not None and not np.allclose(cfg.center, c.center):
            raise ValidationError("center", "differs from the center stored in the mesh")
        return c
    if cfg.center is None:
        raise ValidationError("center", "required unless initial is from_file")
    try:
        if kind == "cube":
            return cube_complex(float(value), cfg.center)
        if kind == "regular_polygon":
            return regular_polygon(float(value["radius"]), int(value["k"]), cfg.center)
        verts = np.asarray(value, dtype=float)
        return triangulate_convex_polytope(verts, cfg.center)
    except CenterOutsideError as exc:
        raise ValidationError("center", str(exc)) from exc
    except (TypeError, KeyError, ValueError) as exc:
        raise ValidationError("initial", str(exc)) from exc


def prepare_run(cfg: RunConfig, base_dir: Path | None = None):
    """Materialize (system, initial complex, deformation config) from a config.

    Attaches the Lipschitz constant (estimating it over the initial bounding
    box inflated by 10% when requested) and checks the center is strictly
    inside the initial polytope.
    """
    initial = build_initial(cfg, base_dir)
    if cfg.center is None:
        cfg.center = initial.center
    if containment(cfg.center, initial) is not Containment.INSIDE:
        raise ValidationError("center", "must lie strictly inside the initial polytope")
    model = build_system(cfg)
    if model.dimension != initial.dim:
        raise ValidationError("initial", f"polytope dimension {initial.dim} does not "
                              f"match system dimension {model.dimension}")
    if cfg.lipschitz == "estimate":
        lo = initial.coords.min(axis=0)
        hi = initial.coords.max(axis=0)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * _LIPSCHITZ_INFLATION
        ell = estimate_lipschitz(model, mid - half, mid + half)
    else:
        ell = float(cfg.lipschitz)
    model = model.with_lipschitz(ell)
    dcfg = DeformationConfig(
        alpha=cfg.alpha, center=initial.center, m_max=cfg.m_max,
        t_max=cfg.t_max, subdivision=cfg.subdivision,
        max_simplices=cfg.max_simplices, sweep_fuse=cfg.sweep_fuse,
        min_move=cfg.min_move, threads=cfg.threads,
    )
    return model, initial, dcfg
