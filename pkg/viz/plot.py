#!/usr/bin/env python3
"""Figure generation from invariant-set run artifacts.

Reads only the documented artifact formats (.cplx meshes, trajectory CSVs,
volumes.csv) and emits PNG figures:

  2d       nested polytope outlines with a vector-field quiver, optional
           trajectory overlays and disturbance-cone glyphs
  3d       one shaded surface panel per mesh, optional trajectory curves
  volumes  enclosed volume versus iteration, log scale, one line per run

Usage: plot.py --spec figure.json

The figure spec is a JSON object: {"kind": "2d"|"3d"|"volumes",
"meshes": [...], "out": "fig.png"} plus optional "trajectories" (directory of
t,x1,..,xn CSVs), "system" (vector-field id for the quiver), "cones"
({"lower": [...], "upper": [...]}), "xlim"/"ylim", "volumes" (CSV paths) and
"labels".  Styling is fixed so identical inputs give identical images.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Poly3DCollection  # noqa: E402


class DimensionMismatch(Exception):
    """Mesh dimension does not fit the requested figure kind."""


class SpecError(Exception):
    """Malformed figure spec or artifact."""


# -- artifact readers (kept independent of the producing package) ---------------


def read_mesh(path):
    """Parse a .cplx file into (coords, simplices, center)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("CPLX"):
        raise SpecError(f"{path}: not a .cplx file")
    _, n, nv, ns = lines[0].split()
    n, nv, ns = int(n), int(nv), int(ns)
    coords = np.array([[float(x) for x in ln.split()] for ln in lines[1:1 + nv]])
    simplices = np.array([[int(x) for x in ln.split()]
                          for ln in lines[1 + nv:1 + nv + ns]])
    center = np.array([float(x) for x in lines[2 + nv + ns].split()])
    if coords.shape != (nv, n) or simplices.shape != (ns, n):
        raise SpecError(f"{path}: counts do not match header")
    return coords, simplices, center


def read_trajectories(directory):
    """All t,x1..xn CSVs in a directory, sorted by name."""
    out = []
    for path in sorted(Path(directory).glob("*.csv")):
        rows = path.read_text().splitlines()
        if not rows or not rows[0].startswith("t,"):
            continue
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        out.append(data[:, 1:])
    return out


def read_volumes(path):
    rows = Path(path).read_text().splitlines()
    header = rows[0].split(",")
    try:
        it_col = header.index("iteration")
        vol_col = header.index("volume")
    except ValueError as exc:
        raise SpecError(f"{path}: missing iteration/volume columns") from exc
    iters, vols = [], []
    for row in rows[1:]:
        cells = row.split(",")
        iters.append(int(cells[it_col]))
        vols.append(float(cells[vol_col]))
    return np.array(iters), np.array(vols)


# -- vector fields for the quiver ------------------------------------------------

FIELDS = {
    "vdp": lambda x, y: (y, (1 - x ** 2) * y - x),
    "fitzhugh": lambda x, y: (x - x ** 3 / 3 - y + 0.875,
                              0.08 * (x + 0.7 - 0.8 * y)),
    "curve_tracking": lambda x, y: (-np.sin(y),
                                    (x - 1.0) * np.cos(y) - 6.42 * np.sin(y)),
    "reversed_vdp": lambda x, y: (-y, x - y + y ** 3),
}

PALETTE = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e", "#d62728"]


def _mesh_limits(meshes, pad=0.15):
    coords = np.vstack([m[0] for m in meshes])
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    return lo - pad * span, hi + pad * span


def plot2d(spec):
    """Nested polygon outlines over a quiver field, plus overlays."""
    meshes = [read_mesh(p) for p in spec["meshes"]]
    if any(m[0].shape[1] != 2 for m in meshes):
        raise DimensionMismatch("2d figure needs 2-dimensional meshes")
    lo, hi = _mesh_limits(meshes)
    xlim = spec.get("xlim", [lo[0], hi[0]])
    ylim = spec.get("ylim", [lo[1], hi[1]])

    fig, ax = plt.subplots(figsize=(6.4, 5.6), dpi=120)
    system = spec.get("system")
    if system in FIELDS:
        gx, gy = np.meshgrid(np.linspace(*xlim, 24), np.linspace(*ylim, 24))
        u, v = FIELDS[system](gx, gy)
        mag = np.hypot(u, v) + 1e-12
        ax.quiver(gx, gy, u / mag, v / mag, color="#7fa8d9", width=0.0025,
                  scale=38.0, alpha=0.8)

    for k, (coords, simplices, _) in enumerate(meshes):
        color = PALETTE[k % len(PALETTE)]
        segments = coords[simplices]
        for seg in segments:
            ax.plot(seg[:, 0], seg[:, 1], color=color, lw=1.4,
                    solid_capstyle="round", zorder=3 + k)
        ax.plot([], [], color=color, lw=1.4,
                label=spec.get("labels", [None] * len(meshes))[k]
                or Path(spec["meshes"][k]).stem)

    for traj in read_trajectories(spec["trajectories"]) if spec.get("trajectories") else []:
        ax.plot(traj[:, 0], traj[:, 1], color="#d62728", lw=0.8, zorder=2)

    cones = spec.get("cones")
    if cones and meshes:
        coords, simplices, _ = meshes[-1]
        lo_nu = np.asarray(cones["lower"])
        hi_nu = np.asarray(cones["upper"])
        field = FIELDS.get(system)
        if field is not None:
            mids = coords[simplices].mean(axis=1)
            step = max(1, len(mids) // int(cones.get("count", 12)))
            scale = 0.06 * max(xlim[1] - xlim[0], ylim[1] - ylim[0])
            for p in mids[::step]:
                f = np.array(field(p[0], p[1]))
                for nu in (lo_nu, hi_nu):
                    d = f + nu
                    d = d / (np.linalg.norm(d) + 1e-12) * scale
                    ax.plot([p[0], p[0] + d[0]], [p[1], p[1] + d[1]],
                            color="#1f4e9c", lw=0.9, zorder=4)

    ax.set_xlim(xlim)
    ax.set_ylim(ylim)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal", adjustable="box")
    return _save(fig, spec["out"])


def plot3d(spec):
    """One shaded panel per mesh; trajectories overlay the last panel."""
    meshes = [read_mesh(p) for p in spec["meshes"]]
    if any(m[0].shape[1] != 3 for m in meshes):
        raise DimensionMismatch("3d figure needs 3-dimensional meshes")
    lo, hi = _mesh_limits(meshes, pad=0.05)
    trajectories = (read_trajectories(spec["trajectories"])
                    if spec.get("trajectories") else [])

    n_panels = len(meshes)
    fig = plt.figure(figsize=(5.2 * n_panels, 4.8), dpi=110)
    for k, (coords, simplices, _) in enumerate(meshes):
        ax = fig.add_subplot(1, n_panels, k + 1, projection="3d")
        tris = coords[simplices]
        face = Poly3DCollection(tris, alpha=0.55, facecolor=PALETTE[k % len(PALETTE)],
                                edgecolor="#333333", linewidths=0.3)
        ax.add_collection3d(face)
        if k == n_panels - 1:
            for traj in trajectories:
                ax.plot(traj[:, 0], traj[:, 1], traj[:, 2],
                        color="#d62728", lw=0.8)
        ax.set_xlim(lo[0], hi[0])
        ax.set_ylim(lo[1], hi[1])
        ax.set_zlim(lo[2], hi[2])
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_zlabel("x3")
        labels = spec.get("labels")
        ax.set_title(labels[k] if labels else Path(spec["meshes"][k]).stem,
                     fontsize=10)
    return _save(fig, spec["out"])


def plot_volume_table(spec):
    """Volume-versus-iteration lines on a log scale."""
    paths = spec.get("volumes") or spec.get("meshes")
    if not paths:
        raise SpecError("volumes figure needs a 'volumes' list of CSV paths")
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=120)
    labels = spec.get("labels", [Path(p).parent.name or Path(p).stem for p in paths])
    for k, path in enumerate(paths):
        iters, vols = read_volumes(path)
        ax.semilogy(iters, vols, marker="o", ms=4, lw=1.4,
                    color=PALETTE[k % len(PALETTE)], label=labels[k])
    ax.set_xlabel("iteration")
    ax.set_ylabel("enclosed volume")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, spec["out"])


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="png", metadata={"Software": "viz"})
    plt.close(fig)
    return out


def render(spec):
    kind = spec.get("kind")
    if kind == "2d":
        return plot2d(spec)
    if kind == "3d":
        return plot3d(spec)
    if kind == "volumes":
        return plot_volume_table(spec)
    raise SpecError(f"unknown figure kind {kind!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(description="Render figures from run artifacts.")
    parser.add_argument("--spec", required=True, help="path to a figure spec JSON")
    args = parser.parse_args(argv)
    spec = json.loads(Path(args.spec).read_text())
    out = render(spec)
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
