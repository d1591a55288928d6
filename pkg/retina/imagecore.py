"""Raster, histogram, CDF, quantile and quality-metric primitives.

Images are plain 2-D numpy arrays: ``uint8`` for displayable intensities in
``[0, I_MAX)`` and ``float64`` for transform coefficients. Histograms and CDF
tables are 1-D float or integer arrays of length ``I_MAX``.
"""
import logging

import numpy as np
from PIL import Image

from retina.errors import InputError

logger = logging.getLogger(__name__)

I_MAX = 256

# RGB -> gray weights used for every color input of the pipeline
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_away(values):
    """Round to nearest integer, ties away from zero"""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def to_uint8(values):
    """Round and clamp a real raster to displayable intensities"""
    return np.clip(round_half_away(values), 0, I_MAX - 1).astype(np.uint8)


def as_gray(img):
    """Validate an integer gray raster and return it as uint8"""
    arr = np.asarray(img)
    if arr.size == 0:
        raise InputError("empty input")
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D gray image, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        if not np.all(np.isfinite(arr)):
            raise InputError("image holds non-finite values")
        if np.any(arr != np.round(arr)):
            raise InputError("gray image must hold integer intensities")
    if arr.min() < 0 or arr.max() >= I_MAX:
        raise InputError(f"intensities must lie in [0, {I_MAX})")
    return arr.astype(np.uint8, copy=False)


def to_gray(rgb):
    """Convert an RGB raster to gray by luma weighting"""
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim == 2:
        return to_uint8(arr)
    if arr.ndim != 3 or arr.shape[2] < 3:
        raise InputError(f"unsupported image shape {arr.shape}")
    gray = arr[..., :3] @ np.asarray(LUMA_WEIGHTS)
    return to_uint8(gray)


def load_image(path, max_side=None):
    """Read an image file as an 8-bit gray raster"""
    try:
        with Image.open(path) as im:
            im.load()
            if max_side and max(im.size) > max_side:
                # Keep aspect ratio while bounding the longer side
                im.thumbnail((max_side, max_side), Image.Resampling.LANCZOS)
            if im.mode in ("L", "I;16", "I"):
                return to_uint8(np.asarray(im, dtype=np.float64))
            return to_gray(np.asarray(im.convert("RGB")))
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read image {path}: {e}") from e


def save_image(img, path):
    """Write a gray raster as an 8-bit PNG"""
    Image.fromarray(as_gray(img)).save(path, format="PNG")


def compute_histogram(img):
    """Count pixels per intensity bin"""
    arr = np.asarray(img)
    if arr.size == 0:
        raise InputError("empty input")
    gray = as_gray(arr)
    return np.bincount(gray.ravel(), minlength=I_MAX).astype(np.int64)


def normalized_cdf(hist):
    """Cumulative probability table of a (possibly real-valued) histogram"""
    h = np.asarray(hist, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise InputError("histogram must be a non-empty 1-D array")
    if np.any(h < 0):
        raise InputError("histogram bins must be non-negative")
    total = h.sum()
    if total <= 0:
        raise InputError("histogram has zero total mass")
    cdf = np.cumsum(h) / total
    cdf = np.maximum.accumulate(np.minimum(cdf, 1.0))
    cdf[-1] = 1.0
    return cdf


def quantile_boundaries(hist, t):
    """Split points i_0..i_t holding roughly equal mass between them"""
    if int(t) != t or t < 1:
        raise InputError(f"quantile count must be >= 1, got {t}")
    t = int(t)
    h = np.asarray(hist, dtype=np.float64)
    if np.any(h < 0):
        raise InputError("histogram bins must be non-negative")
    occupied = np.flatnonzero(h > 0)
    if occupied.size == 0:
        raise InputError("histogram has zero total mass")
    lo, hi = int(occupied[0]), int(occupied[-1])
    # CDF >= k/t compared as mass * t >= k * total, exact for integer counts
    mass = np.cumsum(h)
    total = mass[-1]

    bounds = [lo]
    for k in range(1, t):
        idx = int(np.searchsorted(mass * t, k * total, side="left"))
        bounds.append(min(max(idx, bounds[-1]), hi))
    bounds.append(hi)
    return bounds


def mse(a, b):
    """Mean squared difference of intensities scaled to [0, 1]"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InputError("empty input")
    diff = (a - b) / (I_MAX - 1)
    return float(np.mean(diff * diff))


def histogram_equalize(img):
    """Classic full-range histogram equalization (reference baseline)"""
    gray = as_gray(img)
    cdf = normalized_cdf(compute_histogram(gray))
    lut = to_uint8((I_MAX - 1) * cdf)
    return lut[gray]
