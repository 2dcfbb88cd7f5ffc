import math

import numpy as np
import pytest

from conftest import bump
from vexspace.errors import FieldError, GridError, GridMismatch, GridTooSmall, OutOfDomain, SupportViolation
from vexspace.grid import (
    ExponentField,
    Grid,
    SampledField,
    check_support,
    gradient,
    inner,
    integrate,
    l2_norm,
    lp_norm,
    margin_mask,
    resample,
)


class TestGrid:
    def test_from_box_places_corner_nodes(self):
        g = Grid.from_box([0.0, -1.0], [1.0, 1.0], [11, 21])
        assert g.dim == 2
        assert g.spacing == pytest.approx((0.1, 0.1))
        assert g.upper == pytest.approx((1.0, 1.0))
        assert g.size == 231
        assert g.cell_volume == pytest.approx(0.01)

    @pytest.mark.parametrize("origin, spacing, shape", [
        ((0.0,) * 4, (1.0,) * 4, (2,) * 4),
        ((0.0,), (0.0,), (3,)),
        ((0.0,), (-1.0,), (3,)),
        ((0.0,), (1.0,), (1,)),
        ((0.0, 0.0), (1.0,), (3, 3)),
        ((math.nan,), (1.0,), (3,)),
    ])
    def test_rejects_bad_grids(self, origin, spacing, shape):
        with pytest.raises(GridError):
            Grid(origin, spacing, shape)

    def test_rejects_inverted_box(self):
        with pytest.raises(GridError):
            Grid.from_box([1.0], [0.0], [5])

    def test_mesh_is_row_major(self):
        g = Grid.from_box([0, 0], [1, 2], [2, 3])
        x, y = g.mesh()
        assert x[1, 0] == 1.0 and y[0, 2] == 2.0
        assert g.node_coords(5) == pytest.approx((1.0, 2.0))

    def test_refined_keeps_box(self):
        g = Grid.from_box([-1], [1], [5]).refined(4)
        assert g.shape == (17,)
        assert g.upper == pytest.approx((1.0,))


class TestSampledField:
    def test_rejects_non_finite(self, unit_grid):
        vals = np.zeros(101)
        vals[7] = np.inf
        with pytest.raises(FieldError):
            SampledField(unit_grid, vals)

    def test_rejects_wrong_size(self, unit_grid):
        with pytest.raises(FieldError):
            SampledField(unit_grid, np.zeros(100))

    def test_values_are_read_only(self, unit_grid):
        f = SampledField.zeros(unit_grid)
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_arithmetic(self, unit_grid):
        f = SampledField.constant(unit_grid, 2.0)
        g = SampledField.from_function(unit_grid, lambda x: x)
        assert np.allclose((f + g).values, 2 + g.values)
        assert np.allclose((3 * (f - g)).values, 3 * (2 - g.values))
        assert np.allclose((-g).abs().values, g.values)

    def test_mismatched_grids(self, unit_grid):
        other = Grid.from_box([0.0], [1.0], [51])
        with pytest.raises(GridMismatch):
            SampledField.zeros(unit_grid) + SampledField.zeros(other)


class TestExponentField:
    def test_bounds(self, unit_grid):
        p = ExponentField.from_function(unit_grid, lambda x: 2 + x)
        assert p.p_minus == 2.0 and p.p_plus == pytest.approx(3.0)

    @pytest.mark.parametrize("value", [1.0, 0.5])
    def test_rejects_exponent_at_most_one(self, unit_grid, value):
        with pytest.raises(FieldError):
            ExponentField.constant(unit_grid, value)


class TestIntegrate:
    def test_zero(self, unit_grid):
        assert integrate(SampledField.zeros(unit_grid)) == 0.0

    def test_node_sum_convention(self, unit_grid):
        # 101 nodes times h = 0.01
        assert integrate(SampledField.constant(unit_grid, 1.0)) == pytest.approx(1.01, rel=1e-14)

    def test_identity_converges_to_half(self):
        errors = []
        for n in (11, 101, 1001):
            g = Grid.from_box([0], [1], [n])
            errors.append(abs(integrate(SampledField.from_function(g, lambda x: x)) - 0.5))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-3

    def test_linear(self, rng):
        g = Grid.from_box([0, 0], [1, 2], [17, 9])
        f = SampledField(g, rng.standard_normal(g.shape))
        h = SampledField(g, rng.standard_normal(g.shape))
        a, b = 1.7, -0.3
        lhs = integrate(f * a + h * b)
        rhs = a * integrate(f) + b * integrate(h)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_norm_helpers(self, unit_grid):
        f = SampledField.constant(unit_grid, 2.0)
        assert l2_norm(f) == pytest.approx(math.sqrt(4 * 1.01))
        assert lp_norm(f, 3) == pytest.approx((8 * 1.01) ** (1 / 3))
        assert inner(f, f) == pytest.approx(4 * 1.01)


class TestGradient:
    def test_constant_has_zero_gradient(self):
        g = Grid.from_box([0, 0], [1, 1], [5, 7])
        for d in gradient(SampledField.constant(g, 4.2)):
            assert np.all(d.values == 0)

    def test_affine_exact(self, unit_grid):
        (d,) = gradient(SampledField.from_function(unit_grid, lambda x: 3 * x))
        assert np.max(np.abs(d.values - 3)) < 1e-12

    def test_matches_numpy_second_order(self, rng):
        g = Grid.from_box([0, 0, 0], [1, 2, 3], [5, 6, 7])
        f = SampledField(g, rng.standard_normal(g.shape))
        ref = np.gradient(f.values, *g.spacing, edge_order=2)
        for d, r in zip(gradient(f), ref):
            assert np.allclose(d.values, r, rtol=1e-12, atol=1e-12)

    def test_quadratic_interior(self, unit_grid):
        (d,) = gradient(SampledField.from_function(unit_grid, lambda x: x * x))
        assert d.values[50] == pytest.approx(1.0, abs=1e-10)
        # second-order one-sided stencils are exact on quadratics too
        assert d.values[0] == pytest.approx(0.0, abs=1e-10)
        assert d.values[-1] == pytest.approx(2.0, abs=1e-10)

    def test_too_small(self):
        with pytest.raises(GridTooSmall):
            gradient(SampledField.zeros(Grid.from_box([0, 0], [1, 1], [2, 5])))

    def test_second_order_convergence(self, rng):
        freqs = rng.integers(1, 4, size=(3, 2))
        phases = rng.uniform(0, 2 * np.pi, size=3)

        def f(x, y):
            return sum(np.sin(a * x + b * y + c) for (a, b), c in zip(freqs, phases))

        def fx(x, y):
            return sum(a * np.cos(a * x + b * y + c) for (a, b), c in zip(freqs, phases))

        errors = []
        for n in (33, 65, 129):
            g = Grid.from_box([0, 0], [2, 2], [n, n])
            dx, _ = gradient(SampledField.from_function(g, f))
            errors.append(np.max(np.abs(dx.values - fx(*g.mesh()))))
        assert errors[0] / errors[1] >= 3.5
        assert errors[1] / errors[2] >= 3.5


class TestResample:
    def test_identity(self, rng, unit_grid):
        f = SampledField(unit_grid, rng.standard_normal(101))
        assert np.array_equal(resample(f, unit_grid).values, f.values)

    def test_affine_exact_2d(self):
        src = Grid.from_box([0, 0], [1, 1], [5, 9])
        dst = Grid.from_box([0.1, 0.2], [0.9, 1.0], [23, 17])
        f = SampledField.from_function(src, lambda x, y: 2 * x - 3 * y + 1)
        out = resample(f, dst)
        x, y = dst.mesh()
        assert np.max(np.abs(out.values - (2 * x - 3 * y + 1))) < 1e-12

    def test_quadratic_midpoint_error(self):
        src = Grid.from_box([0], [1], [11])
        dst = src.refined(2)
        out = resample(SampledField.from_function(src, lambda x: x * x), dst)
        err = np.abs(out.values - dst.mesh()[0] ** 2)
        assert err.max() <= 0.1 ** 2 / 4 + 1e-15

    def test_out_of_domain(self):
        src = Grid.from_box([0], [1], [11])
        with pytest.raises(OutOfDomain):
            resample(SampledField.zeros(src), Grid.from_box([0], [1.5], [11]))

    def test_integral_preserved_for_supported_fields(self):
        # midpoints carry the average of their neighbours, so for fields vanishing
        # at the box ends the refined node sum equals the coarse one exactly
        for n in (17, 33, 65):
            src = Grid.from_box([-2], [2], [n])
            f = SampledField(src, bump(src.mesh()[0]))
            assert abs(integrate(resample(f, src.refined(2))) - integrate(f)) < 1e-14


class TestSupport:
    def test_margin_mask_width(self):
        g = Grid.from_box([0], [1], [11])
        assert margin_mask(g).tolist() == [True] + [False] * 9 + [True]

    def test_violation_reports_node(self):
        g = Grid.from_box([0], [1], [11])
        vals = np.zeros(11)
        vals[0] = 1.0
        with pytest.raises(SupportViolation, match="enlarge the box"):
            check_support(SampledField(g, vals))
        vals = np.zeros(11)
        vals[1:10] = 1.0
        check_support(SampledField(g, vals))
