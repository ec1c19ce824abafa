import math

import numpy as np
import pytest

from chargelab.charges import (
    Charge,
    extremal_charge,
    extremal_density,
    grad_sup_polar,
    seminorm_K,
    seminorm_Kh,
)
from chargelab.families import make_density, separable_field, sine_component
from chargelab.geometry import ConvexBody, Cone, GeometryError
from chargelab.grids import GridField, GridSpec


def box_setting(d, m, h, n=96):
    K = ConvexBody.box(d)
    C = Cone.orthant(d, m)
    grid = GridSpec.for_cone(d, m, h, n, margin=0.3 * h)
    return K, C, grid


class TestWindowValue:
    def test_prefix_direct_mask_agree_box(self):
        K, C, grid = box_setting(2, 1, 1.0, 64)
        nu = extremal_charge(K, C, 1.0, grid)
        rng = np.random.default_rng(0)
        for _ in range(25):
            y = rng.uniform([-0.2, -1.0], [1.0, 1.0])
            h = rng.uniform(0.1, 0.8)
            vp = nu.window_value(K, y, h, "prefix").value
            vd = nu.window_value(K, y, h, "direct").value
            vm = nu.window_value(K, y, h, "mask").value
            assert vp == pytest.approx(vd, abs=1e-12)
            assert vp == pytest.approx(vm, abs=1e-12)

    def test_window_of_ball_body_against_fine_quadrature(self):
        # oracle: 4x-finer midpoint quadrature of the analytic density
        K2 = ConvexBody.pball(2, 2.0)
        C = Cone.orthant(2, 0)
        grid = GridSpec.for_cone(2, 0, 1.4, 64, margin=0.2)
        from chargelab.families import bump

        f = separable_field(
            grid,
            [sine_component(1.3) * bump(0.0, 1.2),
             sine_component(0.9) * bump(0.0, 1.2)],
        )
        nu = Charge(f, C)
        fine = grid.refine(4)
        y, h = np.array([0.15, -0.1]), 0.6
        acc = 0.0
        for sl, pts in fine.iter_center_chunks():
            u = pts - y[None, :]
            inside = (K2.gauge_many(u) < h) & C.member_many(u)
            if inside.any():
                acc += float(f.value_fn(pts[inside]).sum())
        oracle = acc * fine.cell_volume
        got = nu.window_value(K2, y, h, "mask").value
        assert got == pytest.approx(oracle, abs=3e-3)

    def test_window_additivity_in_disjoint_translates(self):
        K, C, grid = box_setting(1, 0, 1.0, 128)
        nu = extremal_charge(K, C, 1.0, grid)
        whole = nu.window_value(K, np.array([0.0]), 1.0).value
        left = nu.window_value(K, np.array([-0.5]), 0.5).value
        right = nu.window_value(K, np.array([0.5]), 0.5).value
        assert whole == pytest.approx(left + right, abs=1e-12)

    def test_overlap_method_integrates_fractional_cells(self):
        # constant density 1 on (-0.5, 0.5): any window value is just the
        # overlap length, including windows cutting through cells
        grid = GridSpec(lo=np.array([-2.0]), hi=np.array([2.0]), shape=(64,))
        x = grid.axis_centers(0)
        vals = np.where(np.abs(x) < 0.5, 1.0, 0.0)
        nu = Charge(GridField(grid=grid, values=vals), Cone.orthant(1, 0))
        K = ConvexBody.box(1)
        rng = np.random.default_rng(3)
        for _ in range(20):
            y = float(rng.uniform(-1, 1))
            h = float(rng.uniform(0.05, 1.0))
            got = nu.window_value(K, np.array([y]), h, "overlap").value
            lo, hi = max(y - h, -0.5), min(y + h, 0.5)
            want = max(hi - lo, 0.0)
            # only the support boundary cells are inexact (density jumps)
            assert got == pytest.approx(want, abs=float(grid.spacing[0]))

    def test_overlap_matches_prefix_on_aligned_windows(self):
        K, C, grid = box_setting(2, 0, 1.0, 64)
        nu = extremal_charge(K, C, 1.0, grid)
        sp = float(grid.spacing[0])
        for k in (4, 10, 16):
            y = grid.lo + 24 * grid.spacing
            h = k * sp
            vp = nu.window_value(K, y, h, "prefix").value
            vo = nu.window_value(K, y, h, "overlap").value
            assert vo == pytest.approx(vp, abs=1e-12)

    def test_truncation_flag_near_support(self):
        K, C, grid = box_setting(1, 0, 1.0, 64)
        nu = extremal_charge(K, C, 1.0, grid)
        far = nu.window_value(K, np.array([0.0]), 0.5)
        assert not far.truncated
        # window reaching past the grid edge while overlapping the support
        big = nu.window_value(K, np.array([0.0]), 5.0)
        assert big.truncated

    def test_window_values_all_matches_pointwise(self):
        K, C, grid = box_setting(2, 1, 0.8, 48)
        nu = extremal_charge(K, C, 0.8, grid)
        S = nu.window_values_all(K, 0.5)
        rng = np.random.default_rng(1)
        for _ in range(10):
            i = int(rng.integers(grid.size))
            y = grid.flat_to_point(i)
            assert S.reshape(-1)[i] == pytest.approx(
                nu.window_value(K, y, 0.5).value, abs=1e-12
            )


class TestSupportMargin:
    def test_density_touching_grid_edge_rejected(self):
        grid = GridSpec(lo=np.array([-1.0]), hi=np.array([1.0]), shape=(32,))
        f = GridField(grid=grid, values=np.ones(32))
        with pytest.raises(GeometryError):
            Charge(f, Cone.orthant(1, 0))

    def test_orthant_axis_may_touch_zero(self):
        grid = GridSpec(lo=np.array([0.0]), hi=np.array([1.0]), shape=(32,))
        vals = np.zeros(32)
        vals[:16] = 1.0  # mass down to x = 0 is fine on a cone axis
        Charge(GridField(grid=grid, values=vals), Cone.orthant(1, 1))

    def test_check_can_be_disabled(self):
        grid = GridSpec(lo=np.array([-1.0]), hi=np.array([1.0]), shape=(32,))
        f = GridField(grid=grid, values=np.ones(32))
        Charge(f, Cone.orthant(1, 0), check_support=False)


class TestExtremalFamily:
    @pytest.mark.parametrize("d,m,h", [(1, 0, 1.0), (2, 0, 0.7), (2, 1, 1.0),
                                       (2, 2, 1.3), (3, 1, 1.0)])
    def test_sup_and_gradient_sup(self, d, m, h):
        K, C, grid = box_setting(d, m, h, 48)
        f = extremal_density(K, C, h, grid)
        assert f.sup_abs("value", cone=C).value == pytest.approx(h, abs=1e-12)
        assert grad_sup_polar(f, K, C) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("d,m,h", [(1, 0, 1.0), (2, 1, 1.0), (2, 0, 0.7)])
    def test_seminorm_at_h_matches_closed_form(self, d, m, h):
        K, C, grid = box_setting(d, m, h, 96)
        nu = extremal_charge(K, C, h, grid)
        mu = 2.0 ** (d - m)
        want = h ** (d + 1) / (d + 1) * mu
        got = seminorm_Kh(nu, K, h)
        assert got.value == pytest.approx(want, rel=1e-3)
        np.testing.assert_allclose(got.argmax, np.zeros(d), atol=1e-9)

    def test_seminorm_K_plateaus_at_h(self):
        # windows larger than h add nothing once the support is covered
        d, m, h = 1, 0, 1.0
        K, C, grid = box_setting(d, m, h, 128)
        nu = extremal_charge(K, C, h, grid)
        res = seminorm_K(nu, K, h_max=3.0, include_h=[h])
        want = h ** (d + 1) / (d + 1) * 2.0
        assert res.value == pytest.approx(want, rel=2e-4)
        assert res.h_opt == pytest.approx(h, rel=0.05)

    def test_ball_body_extremal_gradient_unit_polar(self):
        K = ConvexBody.pball(2, 2.0)
        C = Cone.orthant(2, 0)
        grid = GridSpec.for_cone(2, 0, 1.0, 48, margin=0.3)
        f = extremal_density(K, C, 1.0, grid)
        assert grad_sup_polar(f, K, C) == pytest.approx(1.0, abs=1e-9)


class TestSeminormGeneralBody:
    def test_general_body_scan_matches_fast_path_for_box(self):
        # cross-check: run the generic O(grid^2) loop with a box body
        d, m, h = 1, 0, 0.8
        K, C, grid = box_setting(d, m, h, 48)
        nu = extremal_charge(K, C, h, grid)
        fast = seminorm_Kh(nu, K, h).value
        best = 0.0
        for _, pts in grid.iter_center_chunks():
            for y in pts:
                best = max(best, abs(nu.window_value(K, y, h, "mask").value))
        assert fast == pytest.approx(best, abs=1e-10)

    def test_large_grid_general_body_refused(self):
        K2 = ConvexBody.pball(2, 2.0)
        C = Cone.orthant(2, 0)
        grid = GridSpec.for_cone(2, 0, 1.0, 512, margin=0.3)
        f = extremal_density(ConvexBody.box(2), C, 1.0, grid)
        nu = Charge(f, C)
        with pytest.raises(GeometryError):
            seminorm_Kh(nu, K2, 1.0)


class TestZeroCharge:
    def test_zero_charge_seminorms(self):
        grid = GridSpec.for_cone(1, 0, 1.0, 32, margin=0.3)
        nu = Charge(GridField(grid=grid, values=np.zeros(32)),
                    Cone.orthant(1, 0))
        assert nu.is_zero
        assert seminorm_Kh(nu, ConvexBody.box(1), 0.5).value == 0.0
        res = seminorm_K(nu, ConvexBody.box(1), 2.0)
        assert res.value == 0.0 and res.flagged


class TestFamilies:
    def test_callbacks_match_grid_values(self):
        grid = GridSpec.for_cone(2, 1, 2.0, 48)
        C = Cone.orthant(2, 1)
        for name in ("gaussian", "sin", "poly"):
            f = make_density(name, grid, C)
            f.check_callback_consistency()

    def test_gaussian_density_supported_inside(self):
        grid = GridSpec.for_cone(2, 0, 2.0, 64)
        C = Cone.orthant(2, 0)
        f = make_density("gaussian", grid, C)
        Charge(f, C)  # margin assertion passes

    def test_gradient_callback_against_finite_differences(self):
        grid = GridSpec.for_cone(2, 0, 2.0, 32)
        f = make_density("sin", grid, Cone.orthant(2, 0))
        rng = np.random.default_rng(2)
        pts = rng.uniform(-1.0, 1.0, size=(40, 2))
        G = f.grad_fn(pts)
        eps = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = eps
            fd = (f.value_fn(pts + e) - f.value_fn(pts - e)) / (2 * eps)
            np.testing.assert_allclose(G[:, k], fd, atol=1e-6)
