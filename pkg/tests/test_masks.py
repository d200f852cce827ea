import numpy as np
import pytest

from stsfill.masks import (
    apply_mask,
    combine_masks,
    coverage,
    gen_cloud_mask,
    gen_slcoff_mask,
    gen_stripe_mask,
    shift_image,
)
from stsfill.tensor_ops import ShapeError


class TestStripeMask:
    def test_exact_pattern(self):
        m = gen_stripe_mask(8, 4, period=4, stripe_width=1)
        expected_rows = np.array([0, 1, 1, 1, 0, 1, 1, 1], dtype=np.uint8)
        np.testing.assert_array_equal(m, np.tile(expected_rows[:, None], (1, 4)))

    def test_phase_shifts_rows(self):
        m0 = gen_stripe_mask(12, 3, period=4, stripe_width=1, phase=0)
        m2 = gen_stripe_mask(12, 3, period=4, stripe_width=1, phase=2)
        np.testing.assert_array_equal(np.roll(m0, 2, axis=0), m2)

    def test_coverage_matches_ratio(self):
        m = gen_stripe_mask(40, 40, period=4, stripe_width=2)
        assert coverage(m) == pytest.approx(0.5)

    def test_rows_uniform_across_columns(self):
        m = gen_stripe_mask(32, 17, period=5, stripe_width=2)
        assert (m == m[:, :1]).all()

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            gen_stripe_mask(8, 8, period=4, stripe_width=4)
        with pytest.raises(ValueError):
            gen_stripe_mask(8, 8, period=16, stripe_width=1)
        with pytest.raises(ValueError):
            gen_stripe_mask(8, 8, period=4, stripe_width=0)

    def test_dtype_and_values(self):
        m = gen_stripe_mask(16, 16)
        assert m.dtype == np.uint8
        assert set(np.unique(m)) <= {0, 1}


class TestSlcOffMask:
    def test_centerline_column_fully_valid(self):
        H, W = 99, 101  # odd width: exact center column exists
        m = gen_slcoff_mask(H, W)
        assert (m[:, W // 2] == 1).all()

    def test_gap_width_grows_toward_edges(self):
        m = gen_slcoff_mask(132, 201, max_gap=10, period=33)
        missing_per_col = (m == 0).sum(axis=0)
        # edge columns lose more pixels than near-center columns
        assert missing_per_col[0] > missing_per_col[90]
        assert missing_per_col[-1] > missing_per_col[110]

    def test_stripes_are_slanted(self):
        m = gen_slcoff_mask(200, 200, angle_deg=8.0)
        # first missing row differs between left and right halves
        left = np.argmax(m[:, 5] == 0)
        right = np.argmax(m[:, -5] == 0)
        assert left != right

    def test_zero_angle_gives_horizontal_bands(self):
        m = gen_slcoff_mask(66, 64, angle_deg=0.0, center_band=0)
        # with no slant, each missing row segment is symmetric about center
        np.testing.assert_array_equal(m[:, :32], m[:, 32:][:, ::-1])

    def test_center_band_widens_valid_strip(self):
        m0 = gen_slcoff_mask(132, 201, center_band=0)
        m20 = gen_slcoff_mask(132, 201, center_band=20)
        assert m20.sum() >= m0.sum()
        # within the widened band, all pixels valid
        assert (m20[:, 100 - 20 : 100 + 21] == 1).all()

    def test_rejects_degenerate_geometry(self):
        with pytest.raises(ValueError):
            gen_slcoff_mask(64, 64, max_gap=40, period=33)
        with pytest.raises(ValueError):
            gen_slcoff_mask(64, 64, max_gap=0)
        with pytest.raises(ValueError):
            gen_slcoff_mask(64, 64, center_band=-1)


class TestCloudMask:
    def test_coverage_within_tolerance(self):
        for target in (0.05, 0.15, 0.3):
            m = gen_cloud_mask(128, 128, target, seed=3)
            assert abs(coverage(m) - target) <= 0.01

    def test_deterministic_per_seed(self):
        a = gen_cloud_mask(64, 64, 0.2, seed=7)
        b = gen_cloud_mask(64, 64, 0.2, seed=7)
        np.testing.assert_array_equal(a, b)
        c = gen_cloud_mask(64, 64, 0.2, seed=8)
        assert not np.array_equal(a, c)

    def test_blobs_are_smooth(self):
        # smoothed-noise threshold masks have far fewer boundary pixels than
        # random masks at the same coverage
        m = gen_cloud_mask(128, 128, 0.2, smoothness=6.0, seed=0)
        transitions = np.abs(np.diff(m.astype(int), axis=0)).sum()
        rng = np.random.default_rng(0)
        rand = (rng.uniform(0, 1, (128, 128)) > 0.2).astype(int)
        rand_transitions = np.abs(np.diff(rand, axis=0)).sum()
        assert transitions < rand_transitions / 4

    def test_rejects_bad_coverage(self):
        for bad in (0.0, 0.5, -0.1, 0.9):
            with pytest.raises(ValueError):
                gen_cloud_mask(64, 64, bad)


class TestCombineApply:
    def test_combine_is_logical_and(self):
        a = np.array([[1, 1, 0, 0]], dtype=np.uint8)
        b = np.array([[1, 0, 1, 0]], dtype=np.uint8)
        np.testing.assert_array_equal(combine_masks(a, b), [[1, 0, 0, 0]])

    def test_combine_shape_mismatch(self):
        with pytest.raises(ShapeError):
            combine_masks(np.ones((4, 4), np.uint8), np.ones((4, 5), np.uint8))

    def test_apply_mask_values(self, rng):
        x = rng.uniform(0.2, 0.8, (2, 3, 6, 6))
        m = gen_stripe_mask(6, 6, period=3, stripe_width=1)
        y = apply_mask(x, m, fill=0.0)
        assert (y[:, :, m == 0] == 0.0).all()
        np.testing.assert_array_equal(y[:, :, m != 0], x[:, :, m != 0])

    def test_apply_mask_custom_fill(self, rng):
        x = rng.uniform(0.2, 0.8, (1, 1, 6, 6))
        m = gen_stripe_mask(6, 6, period=3, stripe_width=1)
        y = apply_mask(x, m, fill=0.5)
        assert (y[:, :, m == 0] == 0.5).all()

    def test_apply_mask_shape_check(self, rng):
        x = rng.uniform(0, 1, (1, 1, 6, 6))
        with pytest.raises(ShapeError):
            apply_mask(x, np.ones((5, 6), np.uint8))


class TestShiftImage:
    def test_interior_translation(self, rng):
        x = rng.uniform(0, 1, (1, 2, 10, 10))
        s = shift_image(x, 2, 0)
        np.testing.assert_array_equal(s[:, :, :, 2:], x[:, :, :, :-2])

    def test_edge_replication(self, rng):
        x = rng.uniform(0, 1, (1, 1, 8, 8))
        s = shift_image(x, 3, 0)
        for k in range(3):
            np.testing.assert_array_equal(s[:, :, :, k], x[:, :, :, 0])

    def test_negative_and_vertical(self, rng):
        x = rng.uniform(0, 1, (1, 1, 9, 9))
        s = shift_image(x, -1, 2)
        np.testing.assert_array_equal(s[:, :, 2:, :-1], x[:, :, :-2, 1:])

    def test_zero_shift_copies(self, rng):
        x = rng.uniform(0, 1, (1, 1, 5, 5))
        s = shift_image(x, 0, 0)
        np.testing.assert_array_equal(s, x)
        assert s is not x

    def test_range_check(self, rng):
        x = rng.uniform(0, 1, (1, 1, 16, 16))
        with pytest.raises(ValueError):
            shift_image(x, 6, 0)
        with pytest.raises(ValueError):
            shift_image(x, 0, -6)
