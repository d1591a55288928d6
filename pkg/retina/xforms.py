"""Wavelet machinery for the pipeline.

* ``dwt2_bior68`` / ``idwt2``: separable level-2 DWT on the Bior 6.8 bank
  (PyWavelets filter tables), symmetric extension.
* ``dtcwt_forward`` / ``dtcwt_inverse``: dual-tree complex wavelet transform
  with the near-symmetric (5,7) first-level pair and 10-tap Q-shift filters
  of the ``dtcwt`` package.
* ``denoise_highpass``: directional-band shrinkage of complex high-pass
  bands, robust median noise estimate plus a locally adaptive Wiener gain.
  No output coefficient exceeds its input in magnitude.
"""
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import dtcwt
import numpy as np
import pywt
from scipy import fft as sp_fft
from scipy.ndimage import convolve1d, uniform_filter

from retina.errors import InputError
from retina.imagecore import save_image, to_uint8

logger = logging.getLogger(__name__)

DWT_WAVELET = "bior6.8"
DWT_MODE = "symmetric"
DWT_LEVELS = 2

DTCWT_BIORT = "near_sym_a"
DTCWT_QSHIFT = "qshift_a"
DTCWT_DEFAULT_LEVELS = 3
DTCWT_MAX_LEVELS = 6

DIRECTIONAL_SPLITS = ("packet", "pyramid")

# Orthonormal two-level packet tree, 16 tiles per band
PACKET_WAVELET = "haar"
PACKET_DEPTH = 2

# Laplacian pyramid with Burt's 5-tap kernel, eight orientation wedges per level
PYRAMID_LEVELS = 2
PYRAMID_DIRECTIONS = 8
BURT_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

MAD_BETA = 0.6745


def _as_real_raster(img):
    arr = np.asarray(img, dtype=np.float64)
    if arr.size == 0:
        raise InputError("empty input")
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D raster, got shape {arr.shape}")
    return arr


def _pad_to_multiple(arr, step):
    pad = [(0, (-n) % step) for n in arr.shape]
    if not any(after for _, after in pad):
        return arr
    return np.pad(arr, pad, mode="symmetric")


@dataclass
class DwtCoeffs:
    """Multi-level 2-D DWT coefficients, coarsest level first"""
    approx: np.ndarray
    details: list
    shape: tuple
    wavelet: str = DWT_WAVELET
    mode: str = DWT_MODE

    @property
    def levels(self):
        return len(self.details)

    def subbands(self):
        """LL, LH, HL, HH rasters of the coarsest level"""
        horizontal, vertical, diagonal = self.details[0]
        return [self.approx, horizontal, vertical, diagonal]


def dwt2_bior68(img, levels=DWT_LEVELS, wavelet=DWT_WAVELET, mode=DWT_MODE):
    arr = _as_real_raster(img)
    dec_len = pywt.Wavelet(wavelet).dec_len
    if min(arr.shape) < dec_len:
        raise InputError(
            f"image too small for {wavelet}: {arr.shape} needs sides >= {dec_len}"
        )
    with warnings.catch_warnings():
        # pywt flags levels beyond its boundary-effect heuristic on small rasters
        warnings.simplefilter("ignore", UserWarning)
        coeffs = pywt.wavedec2(arr, wavelet, mode=mode, level=levels)
    return DwtCoeffs(
        approx=coeffs[0],
        details=[tuple(level) for level in coeffs[1:]],
        shape=arr.shape,
        wavelet=wavelet,
        mode=mode,
    )


def idwt2(coeffs):
    out = pywt.waverec2([coeffs.approx, *coeffs.details], coeffs.wavelet, mode=coeffs.mode)
    rows, cols = coeffs.shape
    return out[:rows, :cols]


@dataclass
class DtcwtPyramid:
    """Low-pass residual and complex high-pass bands (finest first, 6 orientations)"""
    ls_set: np.ndarray
    hs_set: tuple
    shape: tuple

    @property
    def levels(self):
        return len(self.hs_set)


def _dtcwt_transform():
    return dtcwt.Transform2d(biort=DTCWT_BIORT, qshift=DTCWT_QSHIFT)


def dtcwt_forward(img, levels=DTCWT_DEFAULT_LEVELS):
    if int(levels) != levels or not 1 <= levels <= DTCWT_MAX_LEVELS:
        raise InputError(
            f"unsupported level count {levels}, expected 1..{DTCWT_MAX_LEVELS}"
        )
    levels = int(levels)
    arr = _as_real_raster(img)
    padded = _pad_to_multiple(arr, 2 ** levels)
    pyramid = _dtcwt_transform().forward(padded, nlevels=levels)
    return DtcwtPyramid(
        ls_set=np.array(pyramid.lowpass, dtype=np.float64),
        hs_set=tuple(np.array(h, dtype=np.complex128) for h in pyramid.highpasses),
        shape=arr.shape,
    )


def dtcwt_inverse(pyramid):
    out = _dtcwt_transform().inverse(dtcwt.Pyramid(pyramid.ls_set, pyramid.hs_set))
    rows, cols = pyramid.shape
    return np.asarray(out, dtype=np.float64)[:rows, :cols]


@dataclass
class ContourletBands:
    """Directional bands of one real raster, keyed by band name"""
    bands: dict
    shape: tuple
    split: str = "packet"


def _burt_smooth(x, gain=1.0):
    out = convolve1d(x, gain * BURT_KERNEL, axis=0, mode="wrap")
    return convolve1d(out, gain * BURT_KERNEL, axis=1, mode="wrap")


def pyramid_reduce(x):
    return _burt_smooth(x)[::2, ::2]


def pyramid_expand(coarse, shape):
    up = np.zeros(shape, dtype=np.float64)
    up[::2, ::2] = coarse
    return _burt_smooth(up, gain=2.0)


def direction_masks(shape, directions=PYRAMID_DIRECTIONS):
    """Boolean wedges of the DFT plane, one per orientation sector of pi / directions"""
    rows, cols = shape
    fy = sp_fft.fftfreq(rows)[:, None]
    fx = sp_fft.fftfreq(cols)[None, :]
    theta = np.mod(np.arctan2(fy, fx), np.pi)
    sector = np.minimum((theta * directions / np.pi).astype(int), directions - 1)
    return [sector == k for k in range(directions)]


def directional_split(detail, directions=PYRAMID_DIRECTIONS):
    """Orientation bands of a detail image; they sum back to the input"""
    spectrum = sp_fft.fft2(detail)
    return [np.real(sp_fft.ifft2(spectrum * mask)) for mask in direction_masks(detail.shape, directions)]


def _pyramid_bands(padded):
    bands = {}
    x = padded
    for level in range(1, PYRAMID_LEVELS + 1):
        coarse = pyramid_reduce(x)
        detail = x - pyramid_expand(coarse, x.shape)
        for k, part in enumerate(directional_split(detail)):
            bands[f"d{level}_{k}"] = part
        x = coarse
    bands[f"c{PYRAMID_LEVELS}"] = x
    return bands


def _pyramid_merge(bands):
    x = bands[f"c{PYRAMID_LEVELS}"]
    for level in range(PYRAMID_LEVELS, 0, -1):
        detail = sum(bands[f"d{level}_{k}"] for k in range(PYRAMID_DIRECTIONS))
        x = detail + pyramid_expand(x, detail.shape)
    return x


def _packet_bands(padded):
    packet = pywt.WaveletPacket2D(
        data=padded, wavelet=PACKET_WAVELET, mode="periodization", maxlevel=PACKET_DEPTH,
    )
    return {node.path: np.array(node.data) for node in packet.get_level(PACKET_DEPTH, "natural")}


def _packet_merge(bands):
    packet = pywt.WaveletPacket2D(
        data=None, wavelet=PACKET_WAVELET, mode="periodization", maxlevel=PACKET_DEPTH,
    )
    for path, tile in bands.items():
        packet[path] = tile
    return packet.reconstruct(update=False)


def contourlet_decompose(band, split="packet"):
    """Split a real band into directional bands.

    ``packet`` is an orthonormal two-level Haar packet tree (16 tiles).
    ``pyramid`` is a two-level Laplacian pyramid whose details are cut into
    eight orientation wedges, plus the coarse residual (17 bands).
    """
    if split not in DIRECTIONAL_SPLITS:
        raise InputError(f"directional split must be one of {DIRECTIONAL_SPLITS}, got {split!r}")
    arr = _as_real_raster(band)
    if split == "pyramid":
        padded = _pad_to_multiple(arr, 2 ** PYRAMID_LEVELS)
        bands = _pyramid_bands(padded)
    else:
        padded = _pad_to_multiple(arr, 2 ** PACKET_DEPTH)
        bands = _packet_bands(padded)
    return ContourletBands(bands=bands, shape=arr.shape, split=split)


def contourlet_reconstruct(bands):
    if bands.split == "pyramid":
        out = _pyramid_merge(bands.bands)
    else:
        out = _packet_merge(bands.bands)
    rows, cols = bands.shape
    return np.asarray(out, dtype=np.float64)[:rows, :cols]


@dataclass(frozen=True)
class DenoiseConfig:
    """High-pass shrinkage: neighbourhood size A, MAD divisor, directional split and on/off switch"""
    window: int = 7
    beta: float = MAD_BETA
    split: str = "packet"
    enabled: bool = True

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise InputError(f"enh.denoise_window must be >= 1, got {self.window}")
        if self.beta <= 0:
            raise InputError(f"enh.denoise_beta must be > 0, got {self.beta}")
        if self.split not in DIRECTIONAL_SPLITS:
            raise InputError(f"enh.denoise_split must be one of {DIRECTIONAL_SPLITS}, got {self.split!r}")


def estimate_noise_sigma(values, beta=MAD_BETA):
    """Robust noise level median(|x|) / beta"""
    return float(np.median(np.abs(values))) / beta


def shrink_coefficients(coeffs, sigma_n, window):
    """Scale each coefficient by max(v - sigma_n^2, 0) / v, v the local energy"""
    c = np.asarray(coeffs, dtype=np.float64)
    if sigma_n <= 0:
        return c.copy()
    local = uniform_filter(c * c, size=window, mode="reflect")
    noise_var = sigma_n * sigma_n
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(local > 0, np.maximum(local - noise_var, 0.0) / local, 1.0)
    return gain * c


def _denoise_real(band, cfg):
    sigma_n = estimate_noise_sigma(band, cfg.beta)
    if sigma_n == 0:
        return np.array(band, dtype=np.float64)
    split = contourlet_decompose(band, cfg.split)
    shrunk = {
        name: shrink_coefficients(tile, sigma_n, cfg.window)
        for name, tile in split.bands.items()
    }
    rec = contourlet_reconstruct(ContourletBands(bands=shrunk, shape=split.shape, split=split.split))
    # No coefficient may exceed its input in magnitude
    limit = np.abs(band)
    return np.clip(rec, -limit, limit)


def denoise_highpass(hs, cfg=None):
    """Shrink noise out of a complex high-pass band (2-D, or H x W x orientations)"""
    cfg = cfg or DenoiseConfig()
    band = np.asarray(hs)
    if not cfg.enabled:
        return band.copy()
    if band.ndim == 3:
        return np.stack(
            [denoise_highpass(band[..., k], cfg) for k in range(band.shape[-1])], axis=-1
        )
    if np.iscomplexobj(band):
        # Real and imaginary trees carry independent noise estimates
        return _denoise_real(band.real, cfg) + 1j * _denoise_real(band.imag, cfg)
    return _denoise_real(band, cfg)


def _magnitude_png(values):
    mag = np.abs(values)
    peak = mag.max() if mag.size else 0.0
    if peak <= 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    return to_uint8(255.0 * mag / peak)


def dump_pyramid(pyramid, out_dir, stem):
    """Write magnitude-normalised PNGs of every sub-band for inspection"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / f"{stem}_ls.png"]
    save_image(_magnitude_png(pyramid.ls_set), written[0])
    for level, bands in enumerate(pyramid.hs_set, start=1):
        for orientation in range(bands.shape[-1]):
            path = out_dir / f"{stem}_hs{level}_{orientation}.png"
            save_image(_magnitude_png(bands[..., orientation]), path)
            written.append(path)
    logger.debug("Dumped %d sub-band images for %s", len(written), stem)
    return written
