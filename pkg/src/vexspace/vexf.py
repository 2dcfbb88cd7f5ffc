"""VEXF, the plain-text field format.

    vexf 1
    dim n
    shape s1 ... sn
    origin o1 ... on
    spacing h1 ... hn
    <node values, whitespace separated, row-major>

Floats are written with ``repr`` (shortest round-trip form) so a write/read
cycle is bit-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError
from .grid import Grid, SampledField

VERSION = 1


def dumps(f: SampledField) -> str:
    g = f.grid
    lines = [
        f"vexf {VERSION}",
        f"dim {g.dim}",
        "shape " + " ".join(str(n) for n in g.shape),
        "origin " + " ".join(repr(o) for o in g.origin),
        "spacing " + " ".join(repr(h) for h in g.spacing),
    ]
    lines.extend(repr(float(v)) for v in f.values.ravel())
    return "\n".join(lines) + "\n"


def _header(line: str, key: str, count: int | None = None) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise FormatError(f"expected '{key}' line, got {line!r}")
    if count is not None and len(parts) - 1 != count:
        raise FormatError(f"'{key}' needs {count} entries, got {len(parts) - 1}")
    return parts[1:]


def loads(text: str) -> SampledField:
    lines = text.splitlines()
    if len(lines) < 5:
        raise FormatError("truncated VEXF header")
    version = _header(lines[0], "vexf", 1)[0]
    if version != str(VERSION):
        raise FormatError(f"unsupported VEXF version {version!r}")
    try:
        dim = int(_header(lines[1], "dim", 1)[0])
        shape = [int(s) for s in _header(lines[2], "shape", dim)]
        origin = [float(s) for s in _header(lines[3], "origin", dim)]
        spacing = [float(s) for s in _header(lines[4], "spacing", dim)]
        values = np.array(" ".join(lines[5:]).split(), dtype=float)
    except ValueError as exc:
        raise FormatError(f"malformed VEXF: {exc}") from exc
    grid = Grid(tuple(origin), tuple(spacing), tuple(shape))
    if values.size != grid.size:
        raise FormatError(f"expected {grid.size} values, found {values.size}")
    return SampledField(grid, values.reshape(grid.shape))


def write(f: SampledField, path) -> None:
    Path(path).write_text(dumps(f))


def read(path) -> SampledField:
    return loads(Path(path).read_text())
