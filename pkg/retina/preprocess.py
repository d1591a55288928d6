"""Brightness and contrast correction of gray retinal images.

Stages, in order: blend the source histogram with a uniform one, take its
CDF, reshape it with the quadratic rank transmutation map, apply the
CDF-driven adaptive gamma, blend the result back with the original, then
equalize each quantile sub-histogram inside its own intensity sub-range.
"""
import logging
from dataclasses import dataclass

import numpy as np

from retina.errors import InputError
from retina.imagecore import (
    I_MAX,
    as_gray,
    compute_histogram,
    normalized_cdf,
    quantile_boundaries,
    round_half_away,
    to_uint8,
)

logger = logging.getLogger(__name__)

ALPHA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass(frozen=True)
class PreprocessConfig:
    """Blend weight, transmutation, restoration weight and quantile count"""
    alpha: float | None = None  # None selects alpha by grid search
    delta: float = 0.5
    theta: float = 0.7
    quantiles: int = 4

    def __post_init__(self):
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"pre.alpha must lie in [0, 1], got {self.alpha}")
        if not -1.0 <= self.delta <= 1.0:
            raise InputError(f"pre.delta must lie in [-1, 1], got {self.delta}")
        if not 0.0 <= self.theta <= 1.0:
            raise InputError(f"pre.theta must lie in [0, 1], got {self.theta}")
        if int(self.quantiles) != self.quantiles or self.quantiles < 1:
            raise InputError(f"pre.quantiles must be >= 1, got {self.quantiles}")


def blend_histogram(hist, alpha):
    """Convex combination of a histogram with the uniform one of equal mass"""
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"blend weight must lie in [0, 1], got {alpha}")
    h = np.asarray(hist, dtype=np.float64)
    uniform = np.full_like(h, h.sum() / h.size)
    return alpha * h + (1.0 - alpha) * uniform


def qrtm_transform(cdf, delta):
    """Quadratic rank transmutation map (1 + d) F - d F^2"""
    if not -1.0 <= delta <= 1.0:
        raise InputError("invalid transmutation parameter")
    f = np.asarray(cdf, dtype=np.float64)
    out = (1.0 + delta) * f - delta * f * f
    return np.clip(out, 0.0, 1.0)


def adaptive_gamma(img, cdf_t):
    """Per-intensity gamma with exponent 1 - CDF_T(I)"""
    gray = as_gray(img)
    levels = np.arange(I_MAX, dtype=np.float64)
    exponent = 1.0 - np.asarray(cdf_t, dtype=np.float64)
    lut = (I_MAX - 1) * np.power(levels / I_MAX, exponent)
    # Black stays black, including the 0^0 case
    lut[0] = 0.0
    return to_uint8(lut)[gray]


def color_restore(agc, orig, theta):
    """Blend the gamma-corrected image back with the original"""
    if not 0.0 <= theta <= 1.0:
        raise InputError(f"restoration weight must lie in [0, 1], got {theta}")
    agc = as_gray(agc)
    orig = as_gray(orig)
    if agc.shape != orig.shape:
        raise InputError(f"dimension mismatch: {agc.shape} vs {orig.shape}")
    mixed = theta * agc.astype(np.float64) + (1.0 - theta) * orig.astype(np.float64)
    return to_uint8(mixed)


def quantile_equalize(img, t):
    """Equalize each quantile sub-histogram inside its own sub-range"""
    gray = as_gray(img)
    hist = compute_histogram(gray)
    bounds = quantile_boundaries(hist, t)

    lut = np.arange(I_MAX, dtype=np.float64)
    for k in range(1, len(bounds)):
        lo, hi = bounds[k - 1], bounds[k]
        # First segment is closed on the left, later ones start above lo
        start = lo if k == 1 else lo + 1
        if start > hi:
            continue
        segment = hist[start:hi + 1].astype(np.float64)
        if segment.sum() == 0:
            continue
        cdf_k = normalized_cdf(segment)
        lut[start:hi + 1] = lo + (hi - lo) * cdf_k

    lut = np.clip(round_half_away(lut), 0, I_MAX - 1).astype(np.uint8)
    return lut[gray]


def _run_stages(gray, alpha, cfg):
    mh = blend_histogram(compute_histogram(gray), alpha)
    cdf_t = qrtm_transform(normalized_cdf(mh), cfg.delta)
    agc = adaptive_gamma(gray, cdf_t)
    restored = color_restore(agc, gray, cfg.theta)
    return quantile_equalize(restored, cfg.quantiles)


def select_alpha(img, cfg=None):
    """Pick the blend weight that best preserves mean brightness"""
    cfg = cfg or PreprocessConfig()
    gray = as_gray(img)
    target = gray.mean()

    best_alpha, best_err = None, np.inf
    for alpha in ALPHA_GRID:
        err = abs(_run_stages(gray, alpha, cfg).mean() - target)
        if err < best_err:
            best_alpha, best_err = alpha, err
    logger.debug("Selected alpha=%.1f (brightness error %.3f)", best_alpha, best_err)
    return best_alpha


def preprocess(img, cfg=None):
    """Run the full brightness/contrast correction on one image"""
    cfg = cfg or PreprocessConfig()
    gray = as_gray(img)
    alpha = cfg.alpha if cfg.alpha is not None else select_alpha(gray, cfg)
    return _run_stages(gray, alpha, cfg)
