"""Command-line front end: run / check / simulate / volume.

Exit codes: 0 success, 1 unexpected error, 2 bad configuration,
3 budget or fuse exceeded, 4 degenerate geometry, 5 run finished but no
invariant set was certified.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, prepare_run
from .deformation import RunSequence, run_deformation
from .dynamics import (
    ConstantSignal,
    SinusoidSignal,
    VertexSwitchSignal,
    benchmark,
    estimate_lipschitz,
    noise_vertices,
    zero_signal,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DegenerateInputError,
    DegenerateSimplexError,
    RfisError,
    UnknownSystemError,
)
from .invariance import build_lattice, certify_simplex, total_ntp
from .meshio import read_cplx, write_cplx
from .simplicial import enclosed_volume
from .verification import (
    LatticeSeeds,
    RandomBoundarySeeds,
    SimulationConfig,
    falsify,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_DEGENERATE = 4
EXIT_NOT_FOUND = 5

log = logging.getLogger("rfis")


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_run_artifacts(seq: RunSequence, cfg: RunConfig, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for t, c in enumerate(seq.complexes):
        write_cplx(c, outdir / f"iteration_{t}.cplx")
    rows = ["iteration,wall_time_s,volume,total_ntp"]
    for r in seq.records:
        rows.append(f"{r.iteration},{r.wall_time_s:.3f},"
                    f"{_fmt(r.volume)},{_fmt(r.total_ntp)}")
    (outdir / "volumes.csv").write_text("\n".join(rows) + "\n")
    result = {
        "system": cfg.system,
        "alpha": cfg.alpha,
        "center": list(seq.final.center),
        "t_max": cfg.t_max,
        "m_max": cfg.m_max,
        "rfis_found": seq.rfis_found,
        "final_volume": seq.records[-1].volume,
    }
    (outdir / "result.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output_dir = args.output
    if args.threads:
        cfg.threads = args.threads
    if cfg.output_dir is None:
        raise ConfigError("no output directory (give -o or set output_dir)")
    model, initial, dcfg = prepare_run(cfg, base_dir=Path(args.config).parent)
    log.info("system %s, lipschitz %.6g, %d initial simplices",
             model.name, model.lipschitz, initial.num_simplices)
    seq = run_deformation(model, initial, dcfg)
    outdir = Path(cfg.output_dir)
    write_run_artifacts(seq, cfg, outdir)
    if not seq.rfis_found:
        print("RFIS Not Found")
        return EXIT_NOT_FOUND
    print(f"RFIS found: volume {seq.records[-1].volume:.6g}, "
          f"meshes in {outdir}")
    if args.verify:
        report = _default_verify(seq, model)
        (outdir / "verify.json").write_text(json.dumps(report, indent=2) + "\n")
        if any(r["n_escapes"] for r in report):
            print("verification found escapes")
            return EXIT_ERROR
        print("verification: no escapes")
    return EXIT_OK


def _default_verify(seq: RunSequence, model) -> list[dict]:
    """Falsify the final set under each noise-vertex constant signal."""
    final = seq.final
    reports = []
    for vertex in noise_vertices(model.noise, model.dimension):
        simcfg = SimulationConfig(
            seeds=RandomBoundarySeeds(50, rng_seed=0),
            disturbance=ConstantSignal(tuple(vertex)))
        rep = falsify(final, model, simcfg)
        reports.append({
            "signal": list(vertex),
            "n_trajectories": rep.n_trajectories,
            "n_escapes": rep.n_escapes,
            "worst_penetration": rep.worst_penetration,
        })
    return reports


def _load_system(args, mesh) -> object:
    try:
        model = benchmark(args.system, **json.loads(args.params or "{}"))
    except UnknownSystemError as exc:
        raise ConfigError(str(exc)) from exc
    if args.ell is not None:
        return model.with_lipschitz(args.ell)
    lo = mesh.coords.min(axis=0)
    hi = mesh.coords.max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.55 * (hi - lo)
    return model.with_lipschitz(estimate_lipschitz(model, mid - half, mid + half))


def cmd_check(args) -> int:
    mesh = read_cplx(args.mesh)
    model = _load_system(args, mesh)
    lat = build_lattice(mesh.dim, args.mmax)
    verdicts = []
    total = 0.0
    for si in range(mesh.num_simplices):
        v = certify_simplex(mesh, si, model, lat)
        total += v.ntp_ratio
        verdicts.append({
            "index": si,
            "ntp": v.ntp_ratio,
            "passed_at_level": v.passed_at_level,
        })
    report = {
        "mesh": str(args.mesh),
        "system": args.system,
        "lipschitz": model.lipschitz,
        "m_max": args.mmax,
        "total_ntp": total,
        "pass": total == 0.0,
        "simplices": verdicts,
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(f"total NTP {total:.6g}: {'PASS' if total == 0.0 else 'FAIL'}")
    return EXIT_OK if total == 0.0 else EXIT_NOT_FOUND


def _parse_signal(spec: str, dim: int):
    if spec == "zero":
        return zero_signal(dim)
    if spec.startswith("constant:"):
        values = tuple(float(x) for x in spec.split(":", 1)[1].split(","))
        return ConstantSignal(values)
    if spec.startswith("@"):
        payload = json.loads(Path(spec[1:]).read_text())
    else:
        payload = json.loads(spec)
    kind = payload.get("kind")
    if kind == "constant":
        return ConstantSignal(tuple(payload["value"]))
    if kind == "sinusoid":
        return SinusoidSignal(tuple(tuple(map(tuple, comp))
                                    for comp in payload["components"]))
    if kind == "vertex_switch":
        return VertexSwitchSignal(payload["period"],
                                  tuple(map(tuple, payload["vertices"])))
    raise ConfigError(f"unknown signal kind {kind!r}")


def _parse_seeds(spec: str):
    if spec.startswith("lattice:"):
        return LatticeSeeds(int(spec.split(":")[1]))
    if spec.startswith("random:"):
        parts = spec.split(":")
        return RandomBoundarySeeds(int(parts[1]), int(parts[2]) if len(parts) > 2 else 0)
    if spec.startswith("@"):
        return np.asarray(json.loads(Path(spec[1:]).read_text()), dtype=float)
    raise ConfigError(f"bad seeds spec {spec!r} (use lattice:M, random:K[:SEED] or @file)")


def cmd_simulate(args) -> int:
    mesh = read_cplx(args.mesh)
    model = _load_system(args, mesh)
    signal = _parse_signal(args.signal, mesh.dim)
    simcfg = SimulationConfig(step=args.step, horizon=args.horizon,
                              seeds=_parse_seeds(args.seeds),
                              disturbance=signal)
    report = falsify(mesh, model, simcfg, keep_samples=True)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for k, rec in enumerate(report.records):
        header = "t," + ",".join(f"x{i+1}" for i in range(mesh.dim))
        rows = [header]
        for t, state in zip(rec.times, rec.states):
            rows.append(",".join([_fmt(t)] + [_fmt(v) for v in state]))
        (outdir / f"trajectory_{k:04d}.csv").write_text("\n".join(rows) + "\n")
    summary = {
        "n_trajectories": report.n_trajectories,
        "n_escapes": report.n_escapes,
        "n_blowups": report.n_blowups,
        "worst_penetration": report.worst_penetration,
    }
    (outdir / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{report.n_escapes}/{report.n_trajectories} escapes, "
          f"worst penetration {report.worst_penetration:.3g}")
    return EXIT_OK


def cmd_volume(args) -> int:
    mesh = read_cplx(args.mesh)
    print(_fmt(enclosed_volume(mesh)))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfis",
        description="Compute and check polytopic robust forward invariant sets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="deform an initial polytope into invariant sets")
    p_run.add_argument("-c", "--config", required=True)
    p_run.add_argument("-o", "--output")
    p_run.add_argument("--verify", action="store_true",
                       help="falsify the final set with noise-vertex signals")
    p_run.add_argument("--threads", type=int)
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="certify an existing mesh")
    p_check.add_argument("mesh")
    p_check.add_argument("--system", required=True)
    p_check.add_argument("--params", help="JSON object of system parameters")
    p_check.add_argument("--ell", type=float)
    p_check.add_argument("--mmax", type=int, default=8)
    p_check.add_argument("--report")
    p_check.set_defaults(func=cmd_check)

    p_sim = sub.add_parser("simulate", help="integrate disturbed trajectories")
    p_sim.add_argument("mesh")
    p_sim.add_argument("--system", required=True)
    p_sim.add_argument("--params")
    p_sim.add_argument("--ell", type=float)
    p_sim.add_argument("--signal", default="zero")
    p_sim.add_argument("--horizon", type=float, default=50.0)
    p_sim.add_argument("--step", type=float, default=1e-3)
    p_sim.add_argument("--seeds", default="random:20:0")
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_vol = sub.add_parser("volume", help="print the volume a mesh encloses")
    p_vol.add_argument("mesh")
    p_vol.set_defaults(func=cmd_volume)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DegenerateSimplexError, DegenerateInputError) as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except RfisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
