"""Reader and writer for the plain-text .cplx boundary mesh format.

Layout::

    CPLX <n> <NV> <NS>
    NV lines of n coordinates      (17 significant digits, space separated)
    NS lines of n vertex indices   (0-based, orientation order)
    CENTER
    one line of n coordinates

Writing the same complex twice produces byte-identical files, and reading a
written file reproduces the exact float64 values.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MeshFormatError
from .simplicial import BoundaryComplex


def _fmt(values) -> str:
    return " ".join("%.17g" % v for v in values)


def write_cplx(c: BoundaryComplex, path) -> None:
    lines = [f"CPLX {c.dim} {c.num_vertices} {c.num_simplices}"]
    lines.extend(_fmt(row) for row in c.coords)
    lines.extend(" ".join(str(int(v)) for v in row) for row in c.simplices)
    lines.append("CENTER")
    lines.append(_fmt(c.center))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_cplx(path, validate: bool = False) -> BoundaryComplex:
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("CPLX"):
        raise MeshFormatError("missing CPLX header")
    head = lines[0].split()
    if len(head) != 4:
        raise MeshFormatError("header must be 'CPLX <n> <NV> <NS>'")
    try:
        n, nv, ns = (int(x) for x in head[1:])
    except ValueError as exc:
        raise MeshFormatError(f"bad header counts: {exc}") from exc
    expected = 1 + nv + ns + 1 + 1
    if len(lines) != expected:
        raise MeshFormatError(f"expected {expected} lines, found {len(lines)}")
    try:
        coords = np.array([[float(x) for x in ln.split()] for ln in lines[1:1 + nv]])
        simplices = np.array([[int(x) for x in ln.split()]
                              for ln in lines[1 + nv:1 + nv + ns]], dtype=np.int64)
    except ValueError as exc:
        raise MeshFormatError(f"bad numeric field: {exc}") from exc
    if lines[1 + nv + ns] != "CENTER":
        raise MeshFormatError("missing CENTER marker")
    try:
        center = np.array([float(x) for x in lines[2 + nv + ns].split()])
    except ValueError as exc:
        raise MeshFormatError(f"bad center line: {exc}") from exc
    if coords.shape != (nv, n):
        raise MeshFormatError("vertex block does not match declared counts")
    if simplices.shape != (ns, n):
        raise MeshFormatError("simplex block does not match declared counts")
    if center.shape != (n,):
        raise MeshFormatError("center must have n coordinates")
    if ns and (simplices.min() < 0 or simplices.max() >= nv):
        raise MeshFormatError("simplex vertex index out of range")
    c = BoundaryComplex(coords, simplices, center)
    if validate:
        c.validate()
    return c
