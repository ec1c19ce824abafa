import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chargelab import windows
from chargelab._winpure import box_window_sums as pure_sums


def random_case(rng, d, n, q):
    values = rng.random((n,) * d)
    prefix = windows.build_prefix(values)
    i0s = [rng.integers(0, n, size=q) for _ in range(d)]
    i1s = [np.minimum(a + rng.integers(0, n, size=q), n) for a in i0s]
    return values, prefix, i0s, i1s


class TestPrefixTable:
    @pytest.mark.parametrize("d,n", [(1, 64), (2, 32), (3, 12), (4, 6)])
    def test_batched_matches_direct_slicing(self, d, n):
        rng = np.random.default_rng(d)
        values, prefix, i0s, i1s = random_case(rng, d, n, 8)
        out = windows.box_window_sums(prefix, i0s, i1s)
        for idx in np.ndindex(*out.shape):
            a = [i0s[k][idx[k]] for k in range(d)]
            b = [i1s[k][idx[k]] for k in range(d)]
            ref = windows.box_window_sum_direct(values, a, b)
            assert abs(out[idx] - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_empty_window_is_zero(self):
        values = np.ones((5, 5))
        prefix = windows.build_prefix(values)
        out = windows.box_window_sums(prefix, [np.array([2])] * 2,
                                      [np.array([2])] * 2)
        assert out[0, 0] == 0.0

    def test_full_window_is_total(self):
        rng = np.random.default_rng(0)
        values = rng.random((7, 7, 7))
        prefix = windows.build_prefix(values)
        out = windows.box_window_sums(prefix, [np.array([0])] * 3,
                                      [np.array([7])] * 3)
        assert out.reshape(()) == pytest.approx(values.sum(), rel=1e-12)

    @given(st.integers(0, 1_000_000))
    @settings(max_examples=30, deadline=None)
    def test_compiled_and_pure_agree(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 4))
        values, prefix, i0s, i1s = random_case(rng, d, 16, 5)
        np.testing.assert_allclose(
            windows.box_window_sums(prefix, i0s, i1s),
            pure_sums(prefix, i0s, i1s),
            rtol=0, atol=1e-12,
        )


class TestIndexRange:
    # grid: n cells of width delta starting at lo; centers lo + (j+0.5)delta
    def test_strict_interval_selects_interior_centers(self):
        # centers 0.5, 1.5, ..., 9.5; open interval (1.0, 4.0) -> cells 1..3
        i0, i1 = windows.index_range(0.0, 1.0, 10, 1.0, 4.0)
        assert (i0, i1) == (1, 4)

    def test_center_on_boundary_is_excluded(self):
        # open interval (0.5, 2.5) has centers 0.5 and 2.5 on its boundary
        i0, i1 = windows.index_range(0.0, 1.0, 10, 0.5, 2.5)
        assert (i0, i1) == (1, 2)

    def test_tiny_float_noise_does_not_flip_boundary(self):
        eps = 1e-13
        a, b = windows.index_range(0.0, 1.0, 10, 0.5 - eps, 2.5 + eps)
        assert (a, b) == (1, 2)

    def test_clipping_to_grid(self):
        i0, i1 = windows.index_range(0.0, 1.0, 10, -5.0, 50.0)
        assert (i0, i1) == (0, 10)

    def test_empty_interval(self):
        i0, i1 = windows.index_range(0.0, 1.0, 10, 3.0, 3.0)
        assert i0 == i1

    @given(
        st.floats(-10, 10, allow_nan=False),
        st.floats(-10, 10, allow_nan=False),
    )
    @settings(max_examples=200, deadline=None)
    def test_range_is_sound(self, a, b):
        lo, delta, n = -3.0, 0.25, 40
        i0, i1 = windows.index_range(lo, delta, n, a, b)
        assert 0 <= i0 <= i1 <= n
        centers = lo + (np.arange(n) + 0.5) * delta
        inside = (centers > a + 1e-12) & (centers < b - 1e-12)
        picked = np.zeros(n, dtype=bool)
        picked[i0:i1] = True
        # strictly interior centers must be picked; picked centers must not
        # be strictly outside
        assert not np.any(inside & ~picked)
        outside = (centers < a - 1e-9) | (centers > b + 1e-9)
        assert not np.any(picked & outside)


def test_kernel_name_reported():
    assert windows.KERNEL in ("cython", "pure")
