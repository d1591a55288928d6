import unittest

import numpy as np
import numpy.testing as npt

from retina.constants import FOS_NAMES, GLCM_NAMES, HOC_NAMES, HOS_NAMES
from retina.errors import InputError
from retina.statfeat import (
    GlcmConfig,
    HocConfig,
    bispectrum,
    directional_lines,
    directional_sequence,
    first_order_stats,
    glcm_features,
    glcm_matrix,
    hoc_features,
    hos_features,
    principal_domain,
    quantize,
    statistical_features,
    third_order_cumulant,
)


class TestFirstOrder(unittest.TestCase):
    def test_known_vector(self):
        f = first_order_stats(np.array([1.0, 2.0, 3.0, 4.0]))
        self.assertAlmostEqual(f["Mean"], 2.5)
        self.assertAlmostEqual(f["Variance"], 1.25)
        self.assertAlmostEqual(f["SD"], np.sqrt(1.25))
        self.assertAlmostEqual(f["Smoothness"], 1.0 - 1.0 / 2.25)
        self.assertAlmostEqual(f["Skewness"], 0.0)
        self.assertAlmostEqual(f["Kurtosis"], 1.64)
        self.assertAlmostEqual(f["Entropy"], 2.0)
        self.assertAlmostEqual(f["RMS"], np.sqrt(7.5))

    def test_constant_band(self):
        f = first_order_stats(np.full((5, 5), 3.0))
        self.assertEqual(f["Mean"], 3.0)
        for name in ("SD", "Entropy", "Variance", "Smoothness", "Kurtosis", "Skewness"):
            self.assertEqual(f[name], 0.0)

    def test_rejects_empty_and_non_finite(self):
        with self.assertRaises(InputError):
            first_order_stats(np.array([]))
        with self.assertRaises(InputError):
            first_order_stats(np.array([1.0, np.nan]))

    def test_normal_samples_have_kurtosis_three(self):
        x = np.random.default_rng(12).normal(size=200_000)
        self.assertAlmostEqual(first_order_stats(x)["Kurtosis"], 3.0, delta=0.05)


class TestGlcm(unittest.TestCase):
    def test_quantize_range(self):
        q = quantize(np.linspace(-3, 5, 100), 8)
        self.assertEqual(q.min(), 0)
        self.assertEqual(q.max(), 7)

    def test_striped_image(self):
        stripes = np.tile([0.0, 1.0], (6, 3))
        f = glcm_features(stripes, GlcmConfig(levels=2))
        self.assertAlmostEqual(f["Contrast"], 0.75)
        self.assertAlmostEqual(f["Energy"], 0.3125)
        self.assertAlmostEqual(f["IDM"], 0.625)
        self.assertAlmostEqual(f["Homogeneity"], 0.625)

    def test_matrix_is_normalized_and_symmetric(self):
        p = glcm_matrix(np.random.default_rng(0).random((12, 12)))
        self.assertAlmostEqual(p.sum(), 1.0)
        npt.assert_allclose(p, p.T)

    def test_constant_band(self):
        f = glcm_features(np.full((6, 6), 2.0))
        self.assertEqual(f, {"IDM": 1.0, "Contrast": 0.0, "Energy": 1.0, "Homogeneity": 1.0})

    def test_features_ignore_intensity_inversion(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            x = rng.random((16, 16))
            a, b = glcm_features(x), glcm_features(-x)
            for name in GLCM_NAMES:
                self.assertAlmostEqual(a[name], b[name], places=12)

    def test_offset_larger_than_band(self):
        with self.assertRaises(InputError):
            glcm_matrix(np.random.default_rng(1).random((1, 5)))

    def test_checkerboard_pairs_are_all_off_diagonal(self):
        board = np.indices((8, 8)).sum(axis=0) % 2
        p = glcm_matrix(board, GlcmConfig(levels=2, offsets=((0, 1),)))
        npt.assert_allclose(p, [[0.0, 0.5], [0.5, 0.0]])
        f = glcm_features(board, GlcmConfig(levels=2, offsets=((0, 1),)))
        self.assertAlmostEqual(f["Contrast"], 1.0)
        self.assertAlmostEqual(f["Energy"], 0.5)
        self.assertAlmostEqual(f["Homogeneity"], 0.5)
        self.assertAlmostEqual(f["IDM"], 0.5)


class TestCumulants(unittest.TestCase):
    def test_axis_directions_read_rows_and_columns(self):
        x = np.arange(20.0).reshape(4, 5)
        npt.assert_array_equal(directional_sequence(x, 0), x.ravel())
        npt.assert_array_equal(directional_sequence(x, 180), x.ravel())
        npt.assert_array_equal(directional_sequence(x, 90), x[::-1].T.ravel())

    def test_diagonal_lines_stay_inside(self):
        for angle in (10, 50, 130):
            for rr, cc in directional_lines((9, 7), angle):
                self.assertTrue(np.all((rr >= 0) & (rr < 9) & (cc >= 0) & (cc < 7)))

    def test_cumulant_values(self):
        seq = np.array([0.0, 0.0, 3.0])
        self.assertAlmostEqual(third_order_cumulant(seq, 0), 2.0)
        self.assertAlmostEqual(third_order_cumulant(seq, 1), -2.5)
        with self.assertRaises(InputError):
            third_order_cumulant(seq, 3)

    def test_gaussian_noise_has_small_cumulant(self):
        rng = np.random.default_rng(4)
        self.assertLess(abs(third_order_cumulant(rng.normal(size=50000), 0)), 0.1)
        self.assertGreater(third_order_cumulant(rng.exponential(size=50000), 0), 1.5)

    def test_constant_band(self):
        self.assertEqual(hoc_features(np.full((8, 8), 5.0)), dict.fromkeys(HOC_NAMES, 0.0))

    def test_config_fixes_angles(self):
        with self.assertRaises(InputError):
            HocConfig(angles=(0, 45))

    def test_horizontal_cumulant_matches_row_scan(self):
        rng = np.random.default_rng(21)
        for shape in ((5, 7), (9, 4), (12, 12)):
            x = rng.exponential(size=shape)
            z = x.ravel() - x.mean()
            expected = np.mean([np.mean(z[: z.size - lag] * z[lag:] ** 2) for lag in range(9)])
            self.assertAlmostEqual(hoc_features(x)["HOC_180"], expected, places=12)

    def test_sparse_bright_texture_is_positive(self):
        x = (np.random.default_rng(2).random((64, 64)) < 0.1).astype(np.float64)
        self.assertGreater(hoc_features(x)["HOC_180"], 0.0)

    def test_alternating_rows_have_no_skew(self):
        x = np.tile([1.0, -1.0], (16, 8))
        seq = directional_sequence(x, 180)
        for lag in (0, 2, 4, 6, 8):
            self.assertAlmostEqual(third_order_cumulant(seq, lag), 0.0, places=12)
        self.assertAlmostEqual(hoc_features(x)["HOC_180"], 0.0, delta=0.01)


class TestSpectra(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(12)
        self.n = np.arange(64)

    def coupled_signal(self, segments):
        parts = []
        for _ in range(segments):
            p1, p2 = self.rng.uniform(0, 2 * np.pi, size=2)
            parts.append(
                np.cos(2 * np.pi * 10 * self.n / 64 + p1)
                + np.cos(2 * np.pi * 6 * self.n / 64 + p2)
                + np.cos(2 * np.pi * 16 * self.n / 64 + p1 + p2)
                + 0.1 * self.rng.normal(size=64)
            )
        return np.concatenate(parts)

    def test_principal_domain(self):
        mask = principal_domain(64)
        self.assertEqual(mask.sum(), 256)
        self.assertTrue(mask[10, 6])
        self.assertFalse(mask[6, 10])
        self.assertFalse(mask[5, 0])

    def test_phase_coupling_peak(self):
        b = np.abs(bispectrum(self.coupled_signal(64), 64))
        masked = np.where(principal_domain(64), b, 0.0)
        self.assertEqual(np.unravel_index(np.argmax(masked), masked.shape), (10, 6))

        noise = np.abs(bispectrum(self.rng.normal(size=64 * 64), 64))[principal_domain(64)]
        self.assertGreater(masked.max(), 10 * noise.max())

    def test_segment_averaging_suppresses_noise(self):
        mask = principal_domain(64)
        many = np.abs(bispectrum(self.rng.normal(size=64 * 64), 64))[mask].mean()
        few = np.abs(bispectrum(self.rng.normal(size=4 * 64), 64))[mask].mean()
        self.assertLess(many, 0.5 * few)

    def test_short_signals_are_padded(self):
        self.assertEqual(bispectrum(np.arange(10.0), 64).shape, (64, 64))

    def test_hos_of_constant_band(self):
        self.assertEqual(hos_features(np.full((16, 16), 1.0)), dict.fromkeys(HOS_NAMES, 0.0))

    def test_hos_entropies_are_bounded(self):
        f = hos_features(self.rng.normal(size=(32, 32)))
        self.assertGreaterEqual(f["Entropy_HoS"], 0.0)
        self.assertLessEqual(f["Entropy_HoS"], np.log(9) + 1e-12)
        for name in ("Ent_dg1", "Ent_dg2", "Ent_dg3"):
            self.assertLessEqual(f[name], np.log(256) + 1e-12)


class TestStatisticalFeatures(unittest.TestCase):
    def test_constant_image(self):
        f = statistical_features(np.full((64, 64), 100.0))
        self.assertEqual(list(f), FOS_NAMES + GLCM_NAMES + HOC_NAMES + HOS_NAMES)
        self.assertAlmostEqual(f["Mean"], 100.0, places=6)
        for name in ("SD", "Entropy", "Variance", "Smoothness", "Kurtosis", "Skewness", "Contrast"):
            self.assertEqual(f[name], 0.0)
        for name in ("IDM", "Energy", "Homogeneity"):
            self.assertEqual(f[name], 1.0)
        for name in HOC_NAMES + HOS_NAMES:
            self.assertEqual(f[name], 0.0)

    def test_identical_images_give_identical_features(self):
        img = np.random.default_rng(9).integers(0, 256, size=(64, 64))
        self.assertEqual(statistical_features(img), statistical_features(img.copy()))


if __name__ == "__main__":
    unittest.main()
