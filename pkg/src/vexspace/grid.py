"""Uniform grids on boxes, sampled scalar fields, quadrature and difference gradients.

Every field is stored as a read-only ``numpy`` array of shape ``grid.shape``
(C order, axis 0 slowest), so ``values.ravel()`` is the canonical node order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import FieldError, GridError, GridMismatch, GridTooSmall, OutOfDomain, SupportViolation

MAX_DIM = 3
# fraction of each box side that must carry zeros for "compactly supported" fields
SUPPORT_MARGIN = 0.1


@dataclass(frozen=True)
class Grid:
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        shape = tuple(int(s) for s in self.shape)
        if not (len(origin) == len(spacing) == len(shape)):
            raise GridError("origin, spacing and shape must have the same length")
        if not 1 <= len(shape) <= MAX_DIM:
            raise GridError(f"dimension must be in 1..{MAX_DIM}, got {len(shape)}")
        if any(not math.isfinite(h) or h <= 0 for h in spacing):
            raise GridError(f"spacing must be positive, got {spacing}")
        if any(not math.isfinite(o) for o in origin):
            raise GridError(f"origin must be finite, got {origin}")
        if any(s < 2 for s in shape):
            raise GridError(f"every axis needs at least 2 nodes, got {shape}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def from_box(cls, lower: Sequence[float], upper: Sequence[float], nodes: Sequence[int]) -> "Grid":
        """Grid whose first and last nodes sit on the box corners."""
        lower, upper, nodes = list(lower), list(upper), list(nodes)
        if not (len(lower) == len(upper) == len(nodes)):
            raise GridError("lower, upper and nodes must have the same length")
        if any(n < 2 for n in nodes):
            raise GridError(f"every axis needs at least 2 nodes, got {tuple(nodes)}")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise GridError("box upper corner must exceed lower corner on every axis")
        spacing = [(hi - lo) / (n - 1) for lo, hi, n in zip(lower, upper, nodes)]
        return cls(tuple(lower), tuple(spacing), tuple(nodes))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def lower(self) -> tuple[float, ...]:
        return self.origin

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(o + h * (n - 1) for o, h, n in zip(self.origin, self.spacing, self.shape))

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def mesh(self) -> list[np.ndarray]:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x * x for x in self.mesh()))

    def node_coords(self, flat_index: int) -> tuple[float, ...]:
        idx = np.unravel_index(flat_index, self.shape)
        return tuple(float(o + h * i) for o, h, i in zip(self.origin, self.spacing, idx))

    def same_as(self, other: "Grid", rtol: float = 1e-12) -> bool:
        if self.shape != other.shape:
            return False
        return all(
            math.isclose(a, b, rel_tol=rtol, abs_tol=rtol * h)
            for a, b, h in zip(self.origin + self.spacing, other.origin + other.spacing, self.spacing * 2)
        )

    def refined(self, factor: int = 2) -> "Grid":
        """Same box, spacing divided by ``factor``."""
        return Grid(self.origin, tuple(h / factor for h in self.spacing),
                    tuple((n - 1) * factor + 1 for n in self.shape))


@dataclass(frozen=True)
class SampledField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.size != self.grid.size:
            raise FieldError(f"expected {self.grid.size} values, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise FieldError(f"non-finite value at node {bad} {self.grid.node_coords(bad)}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "SampledField":
        """Sample ``func(*coords)`` (vectorized over coordinate arrays)."""
        vals = func(*grid.mesh())
        return cls(grid, np.broadcast_to(np.asarray(vals, dtype=float), grid.shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "SampledField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "SampledField":
        return cls(grid, np.full(grid.shape, float(c)))

    def with_values(self, values) -> "SampledField":
        return SampledField(self.grid, values)

    def __add__(self, other: "SampledField") -> "SampledField":
        require_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        require_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "SampledField":
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SampledField":
        return self.with_values(-self.values)

    def abs(self) -> "SampledField":
        return self.with_values(np.abs(self.values))

    def is_zero(self) -> bool:
        return not np.any(self.values)


class ExponentField:
    """A sampled exponent p(.) with 1 < min p <= max p < inf."""

    def __init__(self, base: SampledField):
        self.base = base
        self.p_minus = float(base.values.min())
        self.p_plus = float(base.values.max())
        if not 1.0 < self.p_minus:
            raise FieldError(f"exponent must exceed 1 everywhere, min is {self.p_minus}")

    @classmethod
    def constant(cls, grid: Grid, p: float) -> "ExponentField":
        return cls(SampledField.constant(grid, p))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ExponentField":
        return cls(SampledField.from_function(grid, func))

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    def __repr__(self):
        return f"ExponentField(p_minus={self.p_minus!r}, p_plus={self.p_plus!r}, grid={self.grid!r})"


def require_same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for other in fields[1:]:
        if not grid.same_as(other.grid):
            raise GridMismatch(f"grid mismatch: {grid} vs {other.grid}")
    return grid


def integrate(f: SampledField) -> float:
    """Node-sum quadrature: sum of values times cell volume."""
    return float(np.sum(f.values) * f.grid.cell_volume)


def inner(f: SampledField, g: SampledField) -> float:
    require_same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def l2_norm(f: SampledField) -> float:
    return math.sqrt(inner(f, f))


def lp_norm(f: SampledField, p: float) -> float:
    """Classical discrete L^p norm for a constant exponent."""
    return float((np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p))


def gradient(f: SampledField) -> list[SampledField]:
    """Second-order differences: central inside, one-sided at the boundary."""
    grid = f.grid
    if any(n < 3 for n in grid.shape):
        raise GridTooSmall(f"gradient needs at least 3 nodes per axis, got {grid.shape}")
    return [SampledField(grid, _derivative(f.values, axis, h)) for axis, h in enumerate(grid.spacing)]


def _derivative(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    # the usual second-order stencils written on first differences, so that
    # constant fields give exactly zero
    d = np.moveaxis(np.diff(a, axis=axis), axis, 0)
    out = np.empty((d.shape[0] + 1,) + d.shape[1:])
    out[1:-1] = d[:-1] + d[1:]
    out[0] = 3 * d[0] - d[1]
    out[-1] = 3 * d[-1] - d[-2]
    return np.moveaxis(out / (2 * h), 0, axis)


def resample(f: SampledField, target: Grid) -> SampledField:
    """Multilinear interpolation of ``f`` at the nodes of ``target``."""
    src = f.grid
    if target.dim != src.dim:
        raise GridMismatch(f"dimension mismatch: {src.dim} vs {target.dim}")
    for lo, hi, tlo, thi, h in zip(src.lower, src.upper, target.lower, target.upper, src.spacing):
        tol = 1e-9 * h
        if tlo < lo - tol or thi > hi + tol:
            raise OutOfDomain(f"target box [{tlo}, {thi}] exceeds source box [{lo}, {hi}]")
    if target.same_as(src):
        return SampledField(target, f.values)
    interp = RegularGridInterpolator(src.axes(), f.values, method="linear")
    pts = np.stack([np.clip(x, lo, hi) for x, lo, hi in zip(target.mesh(), src.lower, src.upper)], axis=-1)
    return SampledField(target, interp(pts.reshape(-1, target.dim)))


def margin_mask(grid: Grid, margin: float = SUPPORT_MARGIN) -> np.ndarray:
    """Boolean mask of nodes closer to the box boundary than ``margin`` times the side."""
    mask = np.zeros(grid.shape, dtype=bool)
    for axis, (x, lo, hi) in enumerate(zip(grid.axes(), grid.lower, grid.upper)):
        width = margin * (hi - lo) * (1 - 1e-9)
        near = (x - lo < width) | (hi - x < width)
        shape = [1] * grid.dim
        shape[axis] = -1
        mask |= near.reshape(shape)
    return mask


def check_support(f: SampledField, margin: float = SUPPORT_MARGIN, what: str = "field") -> None:
    bad = margin_mask(f.grid, margin) & (f.values != 0)
    if np.any(bad):
        node = int(np.flatnonzero(bad)[0])
        raise SupportViolation(
            f"{what} is nonzero at node {f.grid.node_coords(node)} inside the "
            f"{margin:.0%} boundary margin; enlarge the box"
        )
