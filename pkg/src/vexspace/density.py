"""Smooth approximation of compactly supported Sobolev functions.

The approximant for a cutoff parameter lam > 1 is

    S_lam = (1 / (n w_n)) * sum_i  w_lam^i,
    w_lam^i = D_i f  convolved with  g_lam(y) y_i |y|^(1/lam^2 - n),

where g_lam is a smooth radial cutoff vanishing near 0 and beyond 2 lam and w_n
is the volume of the unit ball. As lam grows the kernels tend to y_i / |y|^n
and S_lam tends to f in the variable-exponent Sobolev norm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, HypothesisViolation
from .grid import ExponentField, SampledField, check_support, gradient, require_same_grid
from .lebesgue import luxemburg_norm
from .riesz import (
    convolve_offsets,
    direct_offsets_sum,
    gamma_alpha,
    offset_grid,
    riesz_grid_conv,
)
from .special import unit_ball_volume


# ---------------------------------------------------------------- cutoffs

def _bump_edge(x):
    """exp(-1/(x-1)) for x > 1, else 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x > 1
    out[m] = np.exp(-1.0 / (x[m] - 1.0))
    return out


def _bump_edge_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x > 1
    d = x[m] - 1.0
    out[m] = np.exp(-1.0 / d) / (d * d)
    return out


def psi(x):
    """Smooth step: 0 for x <= 1, 1 for x >= 2, strictly between on (1, 2)."""
    a = _bump_edge(x)
    b = _bump_edge(3.0 - np.asarray(x, dtype=float))
    out = a / (a + b)
    return out if out.ndim else float(out)


def psi_prime(x):
    x = np.asarray(x, dtype=float)
    a, b = _bump_edge(x), _bump_edge(3.0 - x)
    da, db = _bump_edge_prime(x), _bump_edge_prime(3.0 - x)
    out = (da * b + a * db) / (a + b) ** 2
    return out if out.ndim else float(out)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    return lam


def cutoff_radial(r, lam: float):
    """g_lam as a function of the radius: psi(lam r) * (1 - psi(r / lam))."""
    lam = _check_lambda(lam)
    r = np.asarray(r, dtype=float)
    out = psi(lam * r) * (1.0 - psi(r / lam))
    return out if np.ndim(out) else float(out)


def cutoff_radial_prime(r, lam: float):
    lam = _check_lambda(lam)
    r = np.asarray(r, dtype=float)
    return (lam * psi_prime(lam * r) * (1.0 - psi(r / lam))
            - psi(lam * r) * psi_prime(r / lam) / lam)


def cutoff_g(x, lam: float):
    """g_lam at points ``x`` (last axis holds the coordinates).

    Zero on |x| <= 1/lam, one on 2/lam <= |x| <= lam, zero on |x| >= 2 lam.
    """
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1)) if x.ndim else abs(float(x))
    return cutoff_radial(r, lam)


def derivative_bound_check(lam: float, probes: int = 2000, n: int = 2, step: float = 1e-6) -> float:
    """max |grad g_lam(x)| * |x| over radial probes spanning (1/(2 lam), 4 lam).

    Probes are log-spaced along the diagonal direction; the gradient is taken by
    central differences in every coordinate with relative step ``step``.
    """
    lam = _check_lambda(lam)
    if probes < 1000:
        raise DomainError(f"need at least 1000 probes, got {probes}")
    radii = np.geomspace(1.0 / (2 * lam), 4 * lam, probes + 2)[1:-1]
    u = np.full(n, 1.0 / math.sqrt(n))
    pts = radii[:, None] * u[None, :]
    grad2 = np.zeros(probes)
    for axis in range(n):
        e = np.zeros(n)
        e[axis] = 1.0
        dx = (step * radii)[:, None] * e[None, :]
        d = (cutoff_g(pts + dx, lam) - cutoff_g(pts - dx, lam)) / (2 * step * radii)
        grad2 += d * d
    return float(np.max(np.sqrt(grad2) * radii))


# ---------------------------------------------------------------- kernels

def _radius_table(grid):
    z = offset_grid(grid)
    r = np.sqrt(sum(c * c for c in z))
    return z, r


def representation_kernel(grid, i: int) -> np.ndarray:
    """z_i / |z|^n on the offset grid, 0 at z = 0."""
    z, r = _radius_table(grid)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = z[i][nz] / r[nz] ** grid.dim
    return out


def _power(r: np.ndarray, s: float) -> np.ndarray:
    """r^s via exp(s log r) for r > 0, 0 elsewhere."""
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = np.exp(s * np.log(r[nz]))
    return out


def omega_kernel(grid, lam: float, i: int) -> np.ndarray:
    """g_lam(y) y_i |y|^(1/lam^2 - n) on the offset grid."""
    lam = _check_lambda(lam)
    z, r = _radius_table(grid)
    return cutoff_radial(r, lam) * z[i] * _power(r, 1.0 / lam ** 2 - grid.dim)


def omega_kernel_derivative(grid, lam: float, i: int, j: int) -> np.ndarray:
    """d/dy_j of the omega kernel, in closed form."""
    lam = _check_lambda(lam)
    n = grid.dim
    s = 1.0 / lam ** 2
    z, r = _radius_table(grid)
    g = cutoff_radial(r, lam)
    dg = cutoff_radial_prime(r, lam)
    rs = _power(r, s - n)
    inv_r = np.zeros_like(r)
    nz = r > 0
    inv_r[nz] = 1.0 / r[nz]
    term_cut = dg * z[j] * inv_r * z[i] * rs
    term_pow = g * ((1.0 if i == j else 0.0) * rs + (s - n) * z[i] * z[j] * rs * inv_r ** 2)
    return term_cut + term_pow


# ---------------------------------------------------------------- convolutions

def _check_grads(grads) -> list[SampledField]:
    grads = list(grads)
    if not grads:
        raise DomainError("need one gradient field per axis")
    grid = require_same_grid(*grads)
    if len(grads) != grid.dim:
        raise DomainError(f"expected {grid.dim} gradient fields, got {len(grads)}")
    for k, d in enumerate(grads):
        check_support(d, what=f"gradient component {k + 1}")
    return grads


def _convolve(values, table, method, workers):
    if method == "fft":
        return convolve_offsets(values, table, workers)
    if method == "direct":
        return direct_offsets_sum(values, table)
    raise DomainError(f"unknown convolution method {method!r}")


def representation_normaliser(n: int) -> float:
    """1 / (n w_n)."""
    return 1.0 / (n * unit_ball_volume(n))


def integral_representation(grads, method: str = "fft", workers: int | None = None) -> SampledField:
    """Rebuild f from its gradient: (1/(n w_n)) sum_i (z_i/|z|^n) * D_i f."""
    grads = _check_grads(grads)
    grid = grads[0].grid
    total = np.zeros(grid.shape)
    for i, d in enumerate(grads):
        table = representation_kernel(grid, i)
        total += _convolve(d.values, table, method, workers)
    return SampledField(grid, total * grid.cell_volume * representation_normaliser(grid.dim))


def representation_term(grads, i: int, method: str = "fft", workers: int | None = None) -> SampledField:
    """f_i = (z_i/|z|^n) * D_i f, the limit of omega_lambda(grads, lam, i)."""
    grads = _check_grads(grads)
    grid = grads[0].grid
    out = _convolve(grads[i].values, representation_kernel(grid, i), method, workers)
    return SampledField(grid, out * grid.cell_volume)


def omega_lambda(grads, lam: float, i: int, method: str = "fft", workers: int | None = None) -> SampledField:
    """D_i f convolved with the smooth kernel g_lam(y) y_i |y|^(1/lam^2 - n)."""
    grads = _check_grads(grads)
    grid = grads[0].grid
    out = _convolve(grads[i].values, omega_kernel(grid, lam, i), method, workers)
    return SampledField(grid, out * grid.cell_volume)


def omega_lambda_derivative(grads, lam: float, i: int, j: int, workers: int | None = None) -> SampledField:
    """D_j of omega_lambda^i, by convolving with the differentiated kernel."""
    grads = _check_grads(grads)
    grid = grads[0].grid
    table = omega_kernel_derivative(grid, lam, i, j)
    return SampledField(grid, convolve_offsets(grads[i].values, table, workers) * grid.cell_volume)


@dataclass
class DominationWitness:
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.lhs <= self.rhs))

    @property
    def worst_ratio(self) -> float:
        pos = self.rhs > 0
        return float(np.max(self.lhs[pos] / self.rhs[pos])) if np.any(pos) else 0.0


def omega_domination(grads, lam: float, i: int, workers: int | None = None) -> DominationWitness:
    """|omega_lam^i| against 2 gamma(1) I_1(|D_i f|), nodewise (n >= 2)."""
    grads = _check_grads(grads)
    n = grads[0].grid.dim
    if n < 2:
        raise DomainError("I_1 needs dimension at least 2")
    lhs = np.abs(omega_lambda(grads, lam, i, workers=workers).values)
    rhs = 2.0 * gamma_alpha(1.0, n) * riesz_grid_conv(grads[i].abs(), 1.0, workers).values
    return DominationWitness(lhs, rhs)


def derivative_chain(grads, lam: float, i: int, j: int, workers: int | None = None) -> DominationWitness:
    """|D_j omega_lam^i| against (n + 3) * (|y|^(1/lam^2 - n) convolved with |D_i f|).

    The right side equals (n + 3) gamma(s) I_s(|D_i f|) with s = 1/lam^2, so the
    singular cell is treated exactly as in the Riesz potential.
    """
    grads = _check_grads(grads)
    n = grads[0].grid.dim
    s = 1.0 / _check_lambda(lam) ** 2
    lhs = np.abs(omega_lambda_derivative(grads, lam, i, j, workers).values)
    rhs = (n + 3) * gamma_alpha(s, n) * riesz_grid_conv(grads[i].abs(), s, workers).values
    return DominationWitness(lhs, rhs)


# ---------------------------------------------------------------- pipeline

@dataclass
class ApproximationReport:
    lambda_schedule: list[float]
    lp_errors: list[float]
    # grad_errors[k][j]: error of the j-th partial derivative at the k-th lambda
    grad_errors: list[list[float]]
    sobolev_errors: list[float]
    verdict: bool


NONINCREASING_SLACK = 0.02


def smooth_approximant(grads, lam: float, workers: int | None = None) -> SampledField:
    """S_lam = (1/(n w_n)) sum_i omega_lam^i."""
    grads = _check_grads(grads)
    grid = grads[0].grid
    total = sum(omega_lambda(grads, lam, i, workers=workers).values for i in range(grid.dim))
    return SampledField(grid, total * representation_normaliser(grid.dim))


def approximate_by_smooth(f: SampledField, p: ExponentField, lambda_schedule,
                          workers: int | None = None) -> ApproximationReport:
    """Errors of S_lam against f in L^p(.) and W^{1,p(.)} along ``lambda_schedule``.

    Requires min p >= 2 and a strictly increasing schedule of values above 1.
    The verdict is true iff each Sobolev error is at most 1.02 times the previous.
    """
    require_same_grid(f, p)
    if p.p_minus < 2:
        raise HypothesisViolation(f"approximation needs min p >= 2, got p_minus = {p.p_minus}")
    schedule = [_check_lambda(lam) for lam in lambda_schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError(f"lambda schedule must be strictly increasing, got {schedule}")
    check_support(f, what="f")
    grads = gradient(f)
    n = f.grid.dim
    lp_errors, grad_errors, sob_errors = [], [], []
    for lam in schedule:
        if f.is_zero():
            lp_errors.append(0.0)
            grad_errors.append([0.0] * n)
            sob_errors.append(0.0)
            continue
        s_lam = smooth_approximant(grads, lam, workers)
        lp = luxemburg_norm(s_lam - f, p).norm
        ge = [luxemburg_norm(ds - df, p).norm for ds, df in zip(gradient(s_lam), grads)]
        lp_errors.append(lp)
        grad_errors.append(ge)
        sob_errors.append(lp + sum(ge))
    verdict = all(b <= (1 + NONINCREASING_SLACK) * a for a, b in zip(sob_errors, sob_errors[1:]))
    return ApproximationReport(schedule, lp_errors, grad_errors, sob_errors, verdict)


# ---------------------------------------------------------------- decision

class Density(enum.Enum):
    DENSE_BY_DIMENSION = "DENSE_BY_DIMENSION"
    DENSE_BY_RANGE = "DENSE_BY_RANGE"
    DENSE_BY_MAXIMAL = "DENSE_BY_MAXIMAL"
    DENSE_BY_LOG_HOLDER = "DENSE_BY_LOG_HOLDER"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class DensityVerdict:
    verdict: Density
    reason: str

    @property
    def dense(self) -> bool:
        return self.verdict is not Density.UNDECIDED


def density_condition(p_minus: float, p_plus: float, n: int, *, maximal_bounded: bool = False,
                      log_holder: bool = False) -> DensityVerdict:
    """Which sufficient condition (if any) gives density of smooth functions.

    Comparisons are done in exact rational arithmetic on the given floats, so
    boundary cases such as p_plus == n p_minus / (n - p_minus) are decided exactly.
    Never answers "not dense": the conditions are sufficient only.
    """
    if not (isinstance(n, int) and n >= 1):
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    if not all(math.isfinite(v) for v in (p_minus, p_plus)):
        raise DomainError("exponent bounds must be finite")
    if not 1 < p_minus <= p_plus:
        raise DomainError(f"need 1 < p_minus <= p_plus, got {p_minus}, {p_plus}")
    pm, pp = Fraction(p_minus), Fraction(p_plus)
    if pm < 2:
        return DensityVerdict(Density.UNDECIDED, f"p_minus = {p_minus} < 2: no sufficient condition applies")
    if pm >= n:
        return DensityVerdict(Density.DENSE_BY_DIMENSION, f"p_minus = {p_minus} >= n = {n}")
    bound = n * pm / (n - pm)
    if pp <= bound:
        return DensityVerdict(
            Density.DENSE_BY_RANGE,
            f"2 <= p_minus < n and p_plus = {p_plus} <= n p_minus/(n - p_minus) = {float(bound)!r}",
        )
    if maximal_bounded:
        return DensityVerdict(Density.DENSE_BY_MAXIMAL, "p_minus >= 2 and the maximal operator is locally bounded")
    if log_holder:
        return DensityVerdict(Density.DENSE_BY_LOG_HOLDER, "p_minus >= 2 and p is locally log-Hoelder continuous")
    return DensityVerdict(
        Density.UNDECIDED,
        f"p_plus = {p_plus} > n p_minus/(n - p_minus) = {float(bound)!r} and no regularity hypothesis given",
    )
