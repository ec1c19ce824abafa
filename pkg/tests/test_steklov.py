import math

import numpy as np
import pytest

from chargelab.charges import Charge, extremal_charge, seminorm_Kh
from chargelab.families import (
    bump,
    make_density,
    poly_component,
    random_separable_field,
    separable_field,
    sine_component,
)
from chargelab.geometry import ConvexBody, Cone, GeometryError
from chargelab.grids import GridSpec
from chargelab.steklov import (
    MixedParams,
    SteklovParams,
    deviation_sup,
    diff_central,
    diff_forward,
    fubini_residual,
    mixed_operator_apply,
    mixed_operator_field,
    mixed_operator_norm,
    steklov_apply,
    steklov_field,
    steklov_norm,
)


class TestOperatorNorm:
    @pytest.mark.parametrize("d,m,h", [(1, 0, 1.0), (2, 1, 0.5), (3, 2, 2.0)])
    def test_closed_form(self, d, m, h):
        p = SteklovParams.create(ConvexBody.box(d), Cone.orthant(d, m), h)
        assert steklov_norm(p) == pytest.approx(1.0 / (h**d * 2 ** (d - m)))

    def test_norm_bounds_field_on_random_charges(self):
        # |S_h nu(x)| <= ||S_h|| * ||nu||_{K,h} pointwise, and the extremal
        # charge attains it at the origin
        d, m, h = 2, 1, 0.6
        K, C = ConvexBody.box(d), Cone.orthant(d, m)
        p = SteklovParams.create(K, C, h)
        rng = np.random.default_rng(0)
        grid = GridSpec.for_cone(d, m, 1.5, 64)
        for _ in range(5):
            f = random_separable_field(rng, grid, C)
            nu = Charge(f, C)
            S, _ = steklov_field(nu, p)
            sem = seminorm_Kh(nu, K, h).value
            assert np.max(np.abs(S)) <= steklov_norm(p) * sem * (1 + 1e-9)

    def test_norm_attained_by_extremal(self):
        d, m, h = 2, 0, 0.8
        K, C = ConvexBody.box(d), Cone.orthant(d, m)
        grid = GridSpec.for_cone(d, m, h, 96, margin=0.3 * h)
        nu = extremal_charge(K, C, h, grid)
        p = SteklovParams.create(K, C, h)
        sem = seminorm_Kh(nu, K, h).value
        at_theta = abs(steklov_apply(nu, p, np.zeros(d)))
        assert at_theta == pytest.approx(steklov_norm(p) * sem, rel=1e-9)


class TestSteklovOnExtremal:
    @pytest.mark.parametrize("d,m,h", [(1, 0, 1.0), (2, 1, 1.0), (2, 0, 0.5),
                                       (3, 0, 1.0)])
    def test_value_at_origin(self, d, m, h):
        K, C = ConvexBody.box(d), Cone.orthant(d, m)
        grid = GridSpec.for_cone(d, m, h, 96, margin=0.3 * h)
        nu = extremal_charge(K, C, h, grid)
        p = SteklovParams.create(K, C, h)
        assert steklov_apply(nu, p, np.zeros(d)) == pytest.approx(
            h / (d + 1), rel=1e-3
        )

    @pytest.mark.parametrize("d,m,h", [(1, 0, 1.0), (2, 1, 1.0), (2, 0, 0.5)])
    def test_deviation_equality(self, d, m, h):
        K, C = ConvexBody.box(d), Cone.orthant(d, m)
        grid = GridSpec.for_cone(d, m, h, 96, margin=0.3 * h)
        nu = extremal_charge(K, C, h, grid)
        p = SteklovParams.create(K, C, h)
        dev = deviation_sup(nu, p)
        assert dev.value == pytest.approx(d * h / (d + 1), rel=1e-3)

    def test_deviation_bound_on_random_fields(self):
        # deviation <= (d h / (d+1)) * sup polar norm of the gradient
        from chargelab.charges import grad_sup_polar

        d, m, h = 2, 0, 0.5
        K, C = ConvexBody.box(d), Cone.orthant(d, m)
        p = SteklovParams.create(K, C, h)
        rng = np.random.default_rng(4)
        grid = GridSpec.for_cone(d, m, 1.5, 64)
        for _ in range(5):
            f = random_separable_field(rng, grid, C)
            nu = Charge(f, C)
            dev = deviation_sup(nu, p)
            bound = d * h / (d + 1) * grad_sup_polar(f, K, C)
            assert dev.value <= bound + 1e-6


class TestDifferenceOperators:
    def test_forward_difference_of_quadratic(self):
        grid = GridSpec.for_cone(1, 0, 2.0, 64)
        comp = poly_component([0.0, 0.0, 1.0])  # t^2
        f = separable_field(grid, [comp])
        h = 4.0 / 64 * 8  # 8 cells
        g = diff_forward(f, 0, h)
        x = g.grid.axis_centers(0)
        np.testing.assert_allclose(g.values, (x + h) ** 2 - x**2, atol=1e-12)

    def test_central_difference_of_quadratic(self):
        grid = GridSpec.for_cone(1, 0, 2.0, 64)
        f = separable_field(grid, [poly_component([0.0, 0.0, 1.0])])
        h = 4.0 / 64 * 8
        g = diff_central(f, 0, h)
        x = g.grid.axis_centers(0)
        np.testing.assert_allclose(g.values, 4 * h * x, atol=1e-12)

    def test_incommensurate_step_rejected(self):
        grid = GridSpec.for_cone(1, 0, 2.0, 64)
        f = separable_field(grid, [poly_component([0.0, 1.0])])
        with pytest.raises(GeometryError, match="admissible"):
            diff_forward(f, 0, 0.1234567)

    def test_callbacks_follow_the_difference(self):
        grid = GridSpec.for_cone(2, 1, 2.0, 32)
        f = make_density("sin", grid, Cone.orthant(2, 1))
        h = float(grid.spacing[0]) * 4
        g = diff_forward(f, 0, h)
        g.check_callback_consistency()


class TestMixedOperator:
    def test_norm_closed_form(self):
        for d, m, h in [(1, 0, 1.0), (2, 1, 0.5), (3, 3, 1.0)]:
            p = MixedParams(d=d, m=m, h=h)
            assert mixed_operator_norm(p) == pytest.approx(2**m / h**d)

    def test_apply_matches_field_at_centers(self):
        d, m = 2, 1
        grid = GridSpec.for_cone(d, m, 2.0, 48)
        f = make_density("sin", grid, Cone.orthant(d, m))
        h = float(grid.spacing[0]) * 6
        p = MixedParams(d=d, m=m, h=h)
        out = mixed_operator_field(f, p)
        rng = np.random.default_rng(1)
        for _ in range(10):
            idx = tuple(int(rng.integers(s)) for s in out.grid.shape)
            x = np.array([out.grid.axis_centers(k)[idx[k]] for k in range(d)])
            assert out.values[idx] == pytest.approx(
                mixed_operator_apply(f, p, x), abs=1e-10
            )

    def test_averages_mixed_derivative_of_linear_product(self):
        # for f = prod x_i the mixed derivative is 1, so the operator
        # returns exactly 1 at every point
        d, m = 2, 1
        grid = GridSpec.for_cone(d, m, 2.0, 32)
        f = separable_field(grid, [poly_component([0.0, 1.0])] * d)
        p = MixedParams(d=d, m=m, h=float(grid.spacing[0]) * 4)
        out = mixed_operator_field(f, p)
        np.testing.assert_allclose(out.values, 1.0, atol=1e-10)

    @pytest.mark.parametrize("d,m", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2),
                                     (3, 1)])
    def test_fubini_residual_small(self, d, m):
        grid = GridSpec.for_cone(d, m, 2.0, 128 if d <= 2 else 64)
        f = make_density("sin", grid, Cone.orthant(d, m))
        h = float(grid.spacing[0]) * (32 if d <= 2 else 16)
        p = MixedParams(d=d, m=m, h=h)
        rng = np.random.default_rng(d * 10 + m)
        for _ in range(3):
            # snap to cell edges so the window boundary aligns with cells
            # and midpoint quadrature keeps its O(spacing^2) accuracy
            j = rng.integers(0, 8, size=d)
            x = grid.lo + (grid.shape[0] // 2 - 4 + j) * grid.spacing
            x[:m] = np.abs(x[:m])
            # quadrature error grows with window volume; the d=3 case runs
            # on a much coarser lattice
            assert fubini_residual(f, p, x) <= (1e-3 if d <= 2 else 2e-2)

    def test_fubini_residual_shrinks_with_refinement(self):
        d, m = 2, 1
        res = []
        for n in (32, 64):
            grid = GridSpec.for_cone(d, m, 2.0, n)
            f = make_density("sin", grid, Cone.orthant(d, m))
            h = float(grid.spacing[0]) * (n // 4)
            p = MixedParams(d=d, m=m, h=h)
            x = grid.lo + (np.array(grid.shape) // 2) * grid.spacing
            res.append(fubini_residual(f, p, x))
        assert res[1] <= res[0] / 2.0 + 1e-12
