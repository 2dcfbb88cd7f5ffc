"""Variable-exponent modular, Luxemburg and Sobolev norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderViolation, SolverFailure
from .grid import ExponentField, SampledField, gradient, require_same_grid

NORM_TOL = 1e-10
MAX_ITER = 200


def modular(f: SampledField, p: ExponentField) -> float:
    """Sum of |f|^p times cell volume; ``math.inf`` when the powers overflow."""
    require_same_grid(f, p)
    with np.errstate(over="ignore"):
        total = np.sum(np.abs(f.values) ** p.values) * f.grid.cell_volume
    return float(total) if np.isfinite(total) else math.inf


@dataclass
class NormResult:
    norm: float
    modular_at_norm: float
    iterations: int
    bracket: tuple[float, float]
    # every (lambda, modular(f/lambda)) pair the solver evaluated, in order
    trace: list[tuple[float, float]] = field(default_factory=list, repr=False)


class _ScaledModular:
    """lambda -> modular(f/lambda), evaluated in log space on the support of f."""

    def __init__(self, f: SampledField, p: ExponentField):
        a = np.abs(f.values).ravel()
        keep = a > 0
        self.log_a = np.log(a[keep])
        self.p = p.values.ravel()[keep]
        self.vol = f.grid.cell_volume
        self.trace = []

    def __call__(self, log_lam: float) -> float:
        with np.errstate(over="ignore"):
            total = np.sum(np.exp(self.p * (self.log_a - log_lam))) * self.vol
        rho = float(total) if np.isfinite(total) else math.inf
        self.trace.append((math.exp(log_lam), rho))
        return rho


def luxemburg_norm(f: SampledField, p: ExponentField, tol: float = NORM_TOL,
                   max_iter: int = MAX_ITER) -> NormResult:
    """Root of modular(f/lambda) = 1 by bisection on log(lambda).

    The bracket is found by doubling/halving from max|f|; at most ``max_iter``
    doublings are tried before :class:`SolverFailure` is raised.
    """
    require_same_grid(f, p)
    if f.is_zero():
        return NormResult(0.0, 0.0, 0, (0.0, 0.0))
    rho = _ScaledModular(f, p)
    step = math.log(2.0)
    x0 = math.log(float(np.max(np.abs(f.values))))
    r0 = rho(x0)
    if abs(r0 - 1.0) <= tol:
        return NormResult(math.exp(x0), r0, 0, (math.exp(x0), math.exp(x0)), rho.trace)

    lo = hi = x0
    r_hi = r0
    if r0 > 1.0:
        for _ in range(max_iter):
            lo, hi = hi, hi + step
            r_hi = rho(hi)
            if r_hi <= 1.0:
                break
        else:
            raise SolverFailure(f"no upper bracket after {max_iter} doublings")
    else:
        for _ in range(max_iter):
            lo = lo - step
            r_lo = rho(lo)
            if r_lo > 1.0:
                break
            hi, r_hi = lo, r_lo
        else:
            raise SolverFailure(f"no lower bracket after {max_iter} halvings")
    bracket = (math.exp(lo), math.exp(hi))

    best_x, best_r = hi, r_hi
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        r = rho(mid)
        if abs(r - 1.0) < abs(best_r - 1.0):
            best_x, best_r = mid, r
        if abs(r - 1.0) <= tol:
            break
        if r > 1.0:
            lo = mid
        else:
            hi = mid
    return NormResult(math.exp(best_x), best_r, iterations, bracket, rho.trace)


def sobolev_norm_parts(f: SampledField, p: ExponentField) -> list[NormResult]:
    """Luxemburg norms of f followed by those of each partial derivative."""
    require_same_grid(f, p)
    return [luxemburg_norm(f, p)] + [luxemburg_norm(d, p) for d in gradient(f)]


def sobolev_norm(f: SampledField, p: ExponentField) -> float:
    return sum(r.norm for r in sobolev_norm_parts(f, p))


@dataclass
class EmbeddingWitness:
    modular_p: float
    modular_q: float
    modular_r: float
    nodewise_holds: bool
    # smallest value of |f|^p + |f|^r - |f|^q over the nodes
    min_slack: float

    @property
    def holds(self) -> bool:
        return self.nodewise_holds and self.modular_q <= self.modular_p + self.modular_r


def intersection_embedding_check(f: SampledField, p: ExponentField, q: ExponentField,
                                 r: ExponentField) -> EmbeddingWitness:
    """Check |f|^q <= |f|^p + |f|^r at every node for p <= q <= r."""
    grid = require_same_grid(f, p, q, r)
    bad = (p.values > q.values) | (q.values > r.values)
    if np.any(bad):
        node = int(np.flatnonzero(bad)[0])
        raise OrderViolation(node, f"p <= q <= r fails at node {node} {grid.node_coords(node)}")
    a = np.abs(f.values)
    with np.errstate(over="ignore"):
        ap, aq, ar = a ** p.values, a ** q.values, a ** r.values
    slack = (ap + ar) - aq
    return EmbeddingWitness(
        modular_p=modular(f, p),
        modular_q=modular(f, q),
        modular_r=modular(f, r),
        nodewise_holds=bool(np.all(aq <= ap + ar)),
        min_slack=float(np.min(slack)),
    )
