"""Text file formats for finite models, grid fields, and masks.

Finite-model file::

    atoms <m>
    <w_1> ... <w_m>
    field <name>
    <v_1> ... <v_m>
    ...

Grid field file::

    field v1 grid=<N>[x<N>] L=<len> layout=row-major
    <values, row-major, whitespace separated>

Mask files reuse the field layouts with 0/1 entries; for finite models a
bare whitespace-separated 0/1 list (no header) is also accepted.
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .grid import Grid
from .measure import DiscreteMeasureSpace, Field

__all__ = [
    "read_finite_model",
    "write_finite_model",
    "read_grid_field",
    "write_grid_field",
    "read_mask_values",
]


def _tokens(text: str) -> list:
    return text.split()


def read_finite_model(path) -> Tuple[DiscreteMeasureSpace, Dict[str, np.ndarray]]:
    lines = Path(path).read_text().splitlines()
    pos = 0
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    head = _tokens(lines[pos])
    if len(head) != 2 or head[0] != "atoms":
        raise ValueError(f"{path}: expected 'atoms <m>' header, got {lines[pos]!r}")
    m = int(head[1])
    pos += 1
    toks: list = []
    while pos < len(lines) and len(toks) < m:
        toks.extend(_tokens(lines[pos]))
        pos += 1
    if len(toks) < m:
        raise ValueError(f"{path}: expected {m} weights")
    space = DiscreteMeasureSpace([float(t) for t in toks[:m]])
    fields: Dict[str, np.ndarray] = {}
    name = None
    buf: list = []
    for line in lines[pos:]:
        parts = _tokens(line)
        if parts and parts[0] == "field":
            if name is not None:
                fields[name] = _finish_field(path, name, buf, m)
            if len(parts) != 2:
                raise ValueError(f"{path}: malformed field header {line!r}")
            name, buf = parts[1], []
        else:
            buf.extend(parts)
    if name is not None:
        fields[name] = _finish_field(path, name, buf, m)
    return space, fields


def _finish_field(path, name, buf, m) -> np.ndarray:
    if len(buf) != m:
        raise ValueError(f"{path}: field {name!r} has {len(buf)} values, want {m}")
    return np.array([float(t) for t in buf])


def write_finite_model(path, space: DiscreteMeasureSpace,
                       fields: Optional[Dict[str, np.ndarray]] = None) -> None:
    out = [f"atoms {space.size}", " ".join(repr(float(w)) for w in space.weights)]
    for name, vals in (fields or {}).items():
        out.append(f"field {name}")
        out.append(" ".join(repr(float(v)) for v in np.asarray(vals).ravel()))
    Path(path).write_text("\n".join(out) + "\n")


def _parse_grid_header(path, line: str) -> Tuple[int, int, float]:
    parts = _tokens(line)
    if len(parts) < 4 or parts[0] != "field" or parts[1] != "v1":
        raise ValueError(f"{path}: expected 'field v1 ...' header, got {line!r}")
    kv = {}
    for p in parts[2:]:
        if "=" not in p:
            raise ValueError(f"{path}: malformed header token {p!r}")
        k, v = p.split("=", 1)
        kv[k] = v
    if kv.get("layout", "row-major") != "row-major":
        raise ValueError(f"{path}: unsupported layout {kv.get('layout')!r}")
    gspec = kv["grid"]
    if "x" in gspec:
        a, b = gspec.split("x")
        if a != b:
            raise ValueError(f"{path}: anisotropic grids unsupported ({gspec})")
        return 2, int(a), float(kv["L"])
    return 1, int(gspec), float(kv["L"])


def read_grid_field(path, grid: Optional[Grid] = None) -> Tuple[Grid, np.ndarray]:
    """Read a grid field; when `grid` is supplied the header must match it
    and the returned values bind to that instance."""
    lines = Path(path).read_text().splitlines()
    pos = 0
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    n, N, L = _parse_grid_header(path, lines[pos])
    if grid is None:
        grid = Grid(n, L, N)
    elif (grid.n, grid.N) != (n, N) or abs(grid.L - L) > 1e-12:
        raise ValueError(f"{path}: header (n={n}, N={N}, L={L}) does not match "
                         f"the bound grid {grid!r}")
    toks: list = []
    for line in lines[pos + 1:]:
        toks.extend(_tokens(line))
    if len(toks) != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, got {len(toks)}")
    return grid, np.array([float(t) for t in toks])


def write_grid_field(path, grid: Grid, values) -> None:
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size != grid.size:
        raise ValueError(f"need {grid.size} values, got {vals.size}")
    gspec = f"{grid.N}x{grid.N}" if grid.n == 2 else f"{grid.N}"
    lines = [f"field v1 grid={gspec} L={grid.L!r} layout=row-major"]
    if grid.n == 2:
        for row in vals.reshape(grid.N, grid.N):
            lines.append(" ".join(repr(float(v)) for v in row))
    else:
        lines.append(" ".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mask_values(path, space) -> np.ndarray:
    """Read a 0/1 mask bound to `space` (grid header or bare token list)."""
    text = Path(path).read_text()
    first = text.split("\n", 1)[0]
    if first.lstrip().startswith("field"):
        if not isinstance(space, Grid):
            raise ValueError(f"{path}: grid-format mask for a non-grid space")
        _, vals = read_grid_field(path, space)
    else:
        toks = _tokens(text)
        if len(toks) != space.size:
            raise ValueError(f"{path}: expected {space.size} entries, got {len(toks)}")
        vals = np.array([float(t) for t in toks])
    bad = ~np.isin(vals, (0.0, 1.0))
    if bad.any():
        raise ValueError(f"{path}: mask entries must be 0 or 1")
    return vals.astype(bool)


def field_from_file(path, space) -> Field:
    """Convenience: read a grid field file bound to `space`."""
    _, vals = read_grid_field(path, space)
    return Field(space, vals)
