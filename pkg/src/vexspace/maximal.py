"""Discrete Hardy-Littlewood maximal function and log-Hoelder modulus estimation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .errors import EmptyCorpus, NoValidPairs
from .grid import ExponentField, SampledField, require_same_grid
from .lebesgue import luxemburg_norm

# grids with at most this many nodes per axis always get every cube side
EXHAUSTIVE_SIDE_LIMIT = 64
# above that, every side is still scanned while sides * nodes stays below this
SIDE_WORK_BUDGET = 2 ** 28
DEFAULT_SEED = 0x5EED
EXHAUSTIVE_PAIR_LIMIT = 4 ** 6
PAIR_BUDGET = 2 ** 24


def cube_sides(shape) -> list[int]:
    """Cube sides (in nodes) scanned for a grid of the given shape.

    Every side 1..min(shape) when affordable; otherwise a geometric schedule
    whose ratio is chosen to fit ``SIDE_WORK_BUDGET``.
    """
    largest = min(shape)
    size = math.prod(shape)
    if max(shape) <= EXHAUSTIVE_SIDE_LIMIT or largest * size <= SIDE_WORK_BUDGET:
        return list(range(1, largest + 1))
    count = max(2, SIDE_WORK_BUDGET // size)
    ratio = largest ** (1.0 / (count - 1))
    sides = {int(round(ratio ** j)) for j in range(count)} | {largest}
    return sorted(s for s in sides if 1 <= s <= largest)


def _cube_sums(a: np.ndarray, k: int) -> np.ndarray:
    """Sums of ``a`` over every k^n node cube, indexed by the cube's first node."""
    out = a
    for axis in range(a.ndim):
        c = np.cumsum(out, axis=axis)
        zero = np.zeros_like(np.take(c, [0], axis=axis))
        c = np.concatenate([zero, c], axis=axis)
        n = c.shape[axis]
        out = np.take(c, np.arange(k, n), axis=axis) - np.take(c, np.arange(0, n - k), axis=axis)
    return out


def _spread_max(avg: np.ndarray, k: int, shape) -> np.ndarray:
    """At each node, the largest entry of ``avg`` among cubes of side k containing it."""
    pad = [(0, m - s) for m, s in zip(shape, avg.shape)]
    out = np.pad(avg, pad, constant_values=-np.inf)
    for axis in range(out.ndim):
        out = maximum_filter1d(out, k, axis=axis, mode="constant", cval=-np.inf, origin=(k - 1) // 2)
    return out


def maximal_function(f: SampledField) -> SampledField:
    """Largest average of |f| over node-aligned cubes containing each node.

    Sides come from :func:`cube_sides`; all translations are scanned at each
    side, so grids with at most 64 nodes per axis see every node-aligned cube.
    """
    a = np.abs(f.values)
    shape = a.shape
    best = a.copy()
    for k in cube_sides(shape):
        avg = _cube_sums(a, k) / float(k) ** a.ndim
        np.maximum(best, _spread_max(avg, k, shape), out=best)
    # exact bounds |f| <= Mf <= max|f|; clipping only removes summation rounding
    np.clip(best, a, a.max(initial=0.0), out=best)
    return SampledField(f.grid, best)


@dataclass
class ProbeRow:
    field_id: str
    norm_f: float
    norm_Mf: float
    ratio: float


@dataclass
class ProbeReport:
    rows: list[ProbeRow]

    @property
    def ratio(self) -> float:
        return max(r.ratio for r in self.rows)


def local_boundedness_probe(p: ExponentField, corpus, ids=None) -> ProbeReport:
    """Empirical sup of ||Mf|| / ||f|| in L^p(.) over ``corpus``.

    A lower bound on the operator norm over the box; a diagnostic only.
    """
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("the probe needs at least one field")
    ids = list(ids) if ids is not None else [f"f{i}" for i in range(len(corpus))]
    rows = []
    for fid, f in zip(ids, corpus):
        require_same_grid(f, p)
        nf = luxemburg_norm(f, p).norm
        if nf == 0:
            continue
        nm = luxemburg_norm(maximal_function(f), p).norm
        rows.append(ProbeRow(fid, nf, nm, nm / nf))
    if not rows:
        raise EmptyCorpus("every corpus field is zero")
    return ProbeReport(rows)


@dataclass
class LogHolderEstimate:
    c0_hat: float
    pair_count: int
    worst_pair: tuple[int, int]
    exhaustive: bool
    h: float


def _pair_offsets(grid) -> list[tuple[int, ...]]:
    """Nonzero index offsets with |offset * h| < 1/2, one of each +/- pair."""
    bounds = [min(m - 1, int(math.floor(0.5 / h))) for m, h in zip(grid.shape, grid.spacing)]
    offsets = []
    for off in itertools.product(*(range(-b, b + 1) for b in bounds)):
        if off <= (0,) * grid.dim:
            continue
        dist = math.sqrt(sum((o * h) ** 2 for o, h in zip(off, grid.spacing)))
        if dist < 0.5:
            offsets.append(off)
    return offsets


def log_holder_estimate(p: ExponentField, seed: int = DEFAULT_SEED,
                        budget: int = PAIR_BUDGET) -> LogHolderEstimate:
    """Best constant c0 in |p(x) - p(y)| <= c0 / (-log|x - y|) over node pairs.

    Pairs are grouped by index offset (distance strata). Below 4^6 pairs, or
    when the total fits ``budget``, every pair is scanned; otherwise each stratum
    is sampled without replacement with a generator seeded by ``seed``.
    """
    grid = p.grid
    offsets = _pair_offsets(grid)
    if not offsets:
        raise NoValidPairs(f"no node pairs closer than 1/2 on a grid with spacing {grid.spacing}")
    vals = p.values
    counts = [math.prod(m - abs(o) for m, o in zip(grid.shape, off)) for off in offsets]
    total = sum(counts)
    exhaustive = total <= max(EXHAUSTIVE_PAIR_LIMIT, budget)
    cap = None if exhaustive else max(1, budget // len(offsets))
    rng = np.random.default_rng(seed)

    best, best_pair, scanned = 0.0, (0, 0), 0
    for off, count in zip(offsets, counts):
        # positions x with x and x + off both on the grid
        lo = [max(0, -o) for o in off]
        hi = [m - max(0, o) for m, o in zip(grid.shape, off)]
        src = tuple(slice(a, b) for a, b in zip(lo, hi))
        dst = tuple(slice(a + o, b + o) for a, b, o in zip(lo, hi, off))
        diff = np.abs(vals[src] - vals[dst]).ravel()
        sel = None
        if cap is not None and count > cap:
            sel = np.sort(rng.choice(count, size=cap, replace=False))
            diff = diff[sel]
        scanned += diff.size
        dist = math.sqrt(sum((o * h) ** 2 for o, h in zip(off, grid.spacing)))
        score = diff * -math.log(dist)
        j = int(np.argmax(score))
        if score[j] > best:
            best = float(score[j])
            local = int(sel[j]) if sel is not None else j
            sub = np.unravel_index(local, [b - a for a, b in zip(lo, hi)])
            x = tuple(int(s + a) for s, a in zip(sub, lo))
            y = tuple(xi + o for xi, o in zip(x, off))
            best_pair = (int(np.ravel_multi_index(x, grid.shape)), int(np.ravel_multi_index(y, grid.shape)))
    return LogHolderEstimate(best, scanned, best_pair, exhaustive, min(grid.spacing))
