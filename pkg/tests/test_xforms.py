import os
import tempfile
import time
import unittest

import numpy as np
import numpy.testing as npt

from retina.errors import InputError
from retina.xforms import (
    ContourletBands,
    DenoiseConfig,
    contourlet_decompose,
    contourlet_reconstruct,
    denoise_highpass,
    direction_masks,
    directional_split,
    dtcwt_forward,
    dtcwt_inverse,
    dump_pyramid,
    dwt2_bior68,
    estimate_noise_sigma,
    idwt2,
    pyramid_expand,
    pyramid_reduce,
    shrink_coefficients,
)


def gaussian_blob(col, size=64, sigma=1.5):
    rows, cols = np.mgrid[0:size, 0:size]
    return 100.0 * np.exp(-((rows - size / 2) ** 2 + (cols - col) ** 2) / (2 * sigma * sigma))


class TestRoundTrips(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(20)

    def test_dwt_and_dtcwt_reconstruct_random_images(self):
        start = time.perf_counter()
        for _ in range(20):
            img = self.rng.random((64, 64)) * 255
            npt.assert_allclose(idwt2(dwt2_bior68(img)), img, rtol=0, atol=1e-8)
            npt.assert_allclose(dtcwt_inverse(dtcwt_forward(img)), img, rtol=0, atol=1e-8)
        self.assertLess(time.perf_counter() - start, 5.0)

    def test_dtcwt_pads_odd_shapes(self):
        img = self.rng.random((37, 50)) * 255
        pyramid = dtcwt_forward(img, levels=3)
        self.assertEqual(pyramid.levels, 3)
        self.assertEqual(pyramid.hs_set[0].shape[-1], 6)
        npt.assert_allclose(dtcwt_inverse(pyramid), img, rtol=0, atol=1e-8)

    def test_contourlet_split_is_exact(self):
        band = self.rng.normal(size=(30, 22))
        for split, count in (("packet", 16), ("pyramid", 17)):
            bands = contourlet_decompose(band, split)
            self.assertEqual(len(bands.bands), count)
            self.assertEqual(bands.split, split)
            npt.assert_allclose(contourlet_reconstruct(bands), band, rtol=0, atol=1e-10)


class TestDirectionalPyramid(unittest.TestCase):
    def test_reduce_and_expand_keep_constants(self):
        npt.assert_allclose(pyramid_reduce(np.full((8, 8), 3.0)), np.full((4, 4), 3.0))
        npt.assert_allclose(pyramid_expand(np.full((4, 4), 3.0), (8, 8)), np.full((8, 8), 3.0))

    def test_masks_partition_the_plane(self):
        masks = direction_masks((16, 12))
        self.assertEqual(len(masks), 8)
        npt.assert_array_equal(np.sum(masks, axis=0), np.ones((16, 12)))
        self.assertTrue(masks[0][0, 0])

    def test_split_sums_to_detail(self):
        detail = np.random.default_rng(3).normal(size=(20, 16))
        parts = directional_split(detail)
        npt.assert_allclose(np.sum(parts, axis=0), detail, rtol=0, atol=1e-12)

    def test_stripes_land_in_one_wedge(self):
        rows, cols = np.mgrid[0:32, 0:32]
        for stripes, wedge in ((np.cos(0.5 * np.pi * rows), 4), (np.cos(0.5 * np.pi * cols), 0)):
            bands = contourlet_decompose(stripes, "pyramid").bands
            energy = np.array([np.sum(bands[f"d1_{k}"] ** 2) for k in range(8)])
            self.assertGreater(energy.sum(), 0)
            self.assertGreater(energy[wedge] / energy.sum(), 0.999)

    def test_unknown_split(self):
        with self.assertRaises(InputError):
            contourlet_decompose(np.ones((8, 8)), "curvelet")
        with self.assertRaises(InputError):
            DenoiseConfig(split="curvelet")


class TestTransformArguments(unittest.TestCase):
    def test_dwt_sub_bands(self):
        bands = dwt2_bior68(np.ones((64, 64))).subbands()
        self.assertEqual(len(bands), 4)
        self.assertEqual(len({b.shape for b in bands}), 1)

    def test_constant_image_has_no_detail(self):
        coeffs = dwt2_bior68(np.full((64, 64), 100.0))
        for level in coeffs.details:
            for band in level:
                npt.assert_allclose(band, np.zeros_like(band), rtol=0, atol=1e-9)

    def test_dwt_rejects_small_images(self):
        with self.assertRaises(InputError):
            dwt2_bior68(np.ones((16, 16)))

    def test_dtcwt_level_range(self):
        for levels in (0, 7, 2.5):
            with self.assertRaises(InputError):
                dtcwt_forward(np.ones((64, 64)), levels=levels)

    def test_empty_input(self):
        with self.assertRaises(InputError):
            dtcwt_forward(np.zeros((0, 8)))


class TestShiftInvariance(unittest.TestCase):
    def test_dtcwt_energy_varies_less_than_dwt(self):
        def dwt_energy(img):
            return sum(np.sum(d ** 2) for d in dwt2_bior68(img).details[0])

        def dtcwt_energy(img):
            return np.sum(np.abs(dtcwt_forward(img, levels=3).hs_set[1]) ** 2)

        def worst_change(energy):
            ref = energy(gaussian_blob(32))
            return max(abs(energy(gaussian_blob(32 + k)) - ref) / ref for k in (1, 2, 3))

        dtcwt_change = worst_change(dtcwt_energy)
        self.assertLess(dtcwt_change, worst_change(dwt_energy))
        self.assertLess(dtcwt_change, 0.1)


class TestDenoise(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_noise_estimate(self):
        self.assertAlmostEqual(estimate_noise_sigma(np.array([1.0, -2.0, 3.0])), 2.0 / 0.6745)

    def test_shrinkage_never_grows_coefficients(self):
        c = self.rng.normal(size=(24, 24))
        out = shrink_coefficients(c, 0.8, 7)
        self.assertTrue(np.all(np.abs(out) <= np.abs(c)))
        self.assertTrue(np.all(np.sign(out[out != 0]) == np.sign(c[out != 0])))

    def test_shrinkage_limits(self):
        c = self.rng.normal(size=(16, 16))
        npt.assert_array_equal(shrink_coefficients(c, 0.0, 7), c)
        npt.assert_array_equal(shrink_coefficients(c, 1e6, 7), np.zeros_like(c))

    def test_complex_band_energy_contracts(self):
        band = self.rng.normal(size=(32, 32, 6)) + 1j * self.rng.normal(size=(32, 32, 6))
        out = denoise_highpass(band)
        self.assertEqual(out.shape, band.shape)
        self.assertTrue(np.iscomplexobj(out))
        self.assertLessEqual(np.sum(np.abs(out) ** 2), np.sum(np.abs(band) ** 2) * (1 + 1e-12))

    def test_no_coefficient_grows(self):
        band = self.rng.normal(scale=5.0, size=(32, 32))
        band[16, 16] = 80.0
        for split in ("packet", "pyramid"):
            out = denoise_highpass(band, DenoiseConfig(split=split))
            self.assertFalse(np.any(np.abs(out) > np.abs(band)), split)

        stack = self.rng.normal(size=(24, 24, 6)) + 1j * self.rng.normal(size=(24, 24, 6))
        stack[12, 12, :] *= 20.0
        out = denoise_highpass(stack)
        self.assertTrue(np.all(np.abs(out) <= np.abs(stack) * (1 + 1e-12)))

    def test_gaussian_noise_is_mostly_removed(self):
        for seed in range(20):
            band = np.random.default_rng(seed).normal(size=(32, 32))
            out = denoise_highpass(band)
            self.assertLess(np.sum(out ** 2), 0.1 * np.sum(band ** 2), seed)

    def test_band_with_zero_median_is_unchanged(self):
        band = np.zeros((16, 16))
        band[:4, :4] = np.arange(1.0, 17.0).reshape(4, 4)
        npt.assert_array_equal(denoise_highpass(band), band)
        npt.assert_array_equal(denoise_highpass(band - 1j * band), band - 1j * band)

    def test_disabled_denoise_is_identity(self):
        band = self.rng.normal(size=(16, 16)) + 1j
        npt.assert_array_equal(denoise_highpass(band, DenoiseConfig(enabled=False)), band)

    def test_zero_band_passes_through(self):
        npt.assert_array_equal(denoise_highpass(np.zeros((8, 8))), np.zeros((8, 8)))

    def test_config_validation(self):
        with self.assertRaises(InputError):
            DenoiseConfig(window=0)
        with self.assertRaises(InputError):
            DenoiseConfig(beta=0.0)

    def test_reconstruct_from_edited_tiles(self):
        split = contourlet_decompose(self.rng.normal(size=(16, 16)))
        zeroed = ContourletBands({k: np.zeros_like(v) for k, v in split.bands.items()}, split.shape)
        npt.assert_allclose(contourlet_reconstruct(zeroed), np.zeros((16, 16)), atol=1e-12)


class TestPyramidDump(unittest.TestCase):
    def test_one_png_per_band(self):
        with tempfile.TemporaryDirectory() as tmp:
            pyramid = dtcwt_forward(np.random.default_rng(0).random((32, 32)) * 255, levels=2)
            written = dump_pyramid(pyramid, tmp, "img")
            self.assertEqual(len(written), 1 + 2 * 6)
            self.assertTrue(all(os.path.exists(p) for p in written))


if __name__ == "__main__":
    unittest.main()
