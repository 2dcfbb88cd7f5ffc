import numpy as np
import pytest

from vexspace.grid import Grid, SampledField


def bump(x):
    """exp(-1/(1 - x^2)) on (-1, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
    return out


def radial_bump(grid, radius=1.0):
    r = grid.radius() / radius
    return SampledField(grid, bump(r))


def tent(x, centre=0.0, half_width=1.0):
    return np.maximum(0.0, 1.0 - np.abs(x - centre) / half_width)


def random_supported(grid, rng, margin=0.15):
    """Random values on the inner part of the box, zero on the margin."""
    vals = rng.standard_normal(grid.shape)
    for axis, (x, lo, hi) in enumerate(zip(grid.axes(), grid.lower, grid.upper)):
        w = margin * (hi - lo)
        keep = (x - lo >= w) & (hi - x >= w)
        shape = [1] * grid.dim
        shape[axis] = -1
        vals = vals * keep.reshape(shape)
    return SampledField(grid, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_grid():
    return Grid.from_box([0.0], [1.0], [101])
