"""Low-pass enhancement with dynamic structuring elements.

The DTCWT low-pass residual is sharpened by multi-scale white/black top-hats
whose structuring elements grow by self-dilation until the edge content of the
locally s-curve-transformed band drifts too far from the band's own edge
content. High-pass bands are denoised before the inverse transform.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import (
    binary_dilation,
    grey_closing,
    grey_opening,
    maximum_filter,
    minimum_filter,
    uniform_filter,
)
from scipy.special import expit
from skimage.morphology import diamond, disk

from retina.errors import InputError
from retina.imagecore import as_gray, to_uint8
from retina.xforms import (
    DTCWT_MAX_LEVELS,
    DenoiseConfig,
    DtcwtPyramid,
    denoise_highpass,
    dtcwt_forward,
    dtcwt_inverse,
)

logger = logging.getLogger(__name__)

SE_SHAPES = ("square", "cross", "disk")
SCURVE_EPS = 1e-6


@dataclass(frozen=True)
class StructuringElement:
    """Flat binary mask with its origin at the centre"""
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2 or not mask.any():
            raise InputError("structuring element must be a non-empty 2-D mask")
        if mask.shape[0] % 2 == 0 or mask.shape[1] % 2 == 0:
            raise InputError(f"structuring element needs odd sides, got {mask.shape}")
        if not mask[mask.shape[0] // 2, mask.shape[1] // 2]:
            raise InputError("structuring element origin must lie inside the mask")
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def origin(self):
        return (self.mask.shape[0] // 2, self.mask.shape[1] // 2)

    def fits(self, img):
        rows, cols = np.shape(img)
        return self.mask.shape[0] <= rows and self.mask.shape[1] <= cols


def make_se0(shape="square"):
    """Initial 3x3 structuring element of the given shape"""
    if shape == "square":
        return StructuringElement(np.ones((3, 3), dtype=bool))
    if shape == "cross":
        return StructuringElement(diamond(1).astype(bool))
    if shape == "disk":
        return StructuringElement(disk(2).astype(bool))
    raise InputError(f"unknown structuring element shape {shape!r}, expected one of {SE_SHAPES}")


def dilate_chain(se0, t):
    """t-fold Minkowski sum SE_0 + SE_0 + ... + SE_0"""
    if int(t) != t or t < 1:
        raise InputError(f"dilation count must be >= 1, got {t}")
    base = se0.mask
    half_r, half_c = base.shape[0] // 2, base.shape[1] // 2
    mask = base
    for _ in range(int(t) - 1):
        grown = np.pad(mask, ((half_r, half_r), (half_c, half_c)))
        mask = binary_dilation(grown, structure=base)
    return StructuringElement(mask)


def _check_fits(ls, se):
    if not se.fits(ls):
        raise InputError(
            f"structuring element {se.shape} larger than image {np.shape(ls)}"
        )


def tophat_white(ls, se):
    """Image minus its opening"""
    ls = np.asarray(ls, dtype=np.float64)
    _check_fits(ls, se)
    return ls - grey_opening(ls, footprint=se.mask, mode="reflect")


def tophat_black(ls, se):
    """Closing minus image"""
    ls = np.asarray(ls, dtype=np.float64)
    _check_fits(ls, se)
    return grey_closing(ls, footprint=se.mask, mode="reflect") - ls


@dataclass(frozen=True)
class SCurveParams:
    """Logistic remap C + R / (1 + exp((x - delta1) / delta2))"""
    C: float
    R: float
    delta1: float
    delta2: float

    def __post_init__(self):
        if self.delta2 == 0:
            raise InputError("s-curve slope delta2 must be non-zero")
        if self.R <= 0:
            raise InputError(f"s-curve range R must be > 0, got {self.R}")


def _scurve(x, c, r, delta1, delta2):
    return c + r * expit(-(x - delta1) / delta2)


def scurve_transform(img, p=None, window=15):
    """Logistic gray-level remap, global when ``p`` is given, else window-local"""
    x = np.asarray(img, dtype=np.float64)
    if p is not None:
        return _scurve(x, p.C, p.R, p.delta1, p.delta2)

    mean = uniform_filter(x, size=window, mode="reflect")
    mean_sq = uniform_filter(x * x, size=window, mode="reflect")
    std = np.sqrt(np.maximum(mean_sq - mean * mean, 0.0))
    lo = minimum_filter(x, size=window, mode="reflect")
    hi = maximum_filter(x, size=window, mode="reflect")
    # Negative slope makes the curve increasing in x
    delta2 = -np.maximum(std, SCURVE_EPS)
    return _scurve(x, lo, hi - lo, mean, delta2)


def edge_content(img):
    """Mean gradient magnitude from central differences.

    The raster wraps at its borders: the first and last rows (and columns)
    are neighbours, so periodic shifts leave the value unchanged.
    """
    x = np.asarray(img, dtype=np.float64)
    gy = (np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0)) / 2.0
    gx = (np.roll(x, -1, axis=1) - np.roll(x, 1, axis=1)) / 2.0
    return float(np.mean(np.hypot(gx, gy)))


@dataclass(frozen=True)
class EnhanceConfig:
    """Gain, edge-content tolerance, structuring elements and transform depth"""
    k: float = 1.0
    diff_max: float = 0.05  # fraction of the reference edge content
    se0: str = "square"
    t_cap: int = 10
    window: int = 15
    levels: int = 3
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)

    def __post_init__(self):
        if self.diff_max <= 0:
            raise InputError(f"enh.diff_max must be > 0, got {self.diff_max}")
        if self.se0 not in SE_SHAPES:
            raise InputError(f"enh.se0 must be one of {SE_SHAPES}, got {self.se0!r}")
        if int(self.t_cap) != self.t_cap or self.t_cap < 1:
            raise InputError(f"enh.t_cap must be >= 1, got {self.t_cap}")
        if int(self.window) != self.window or self.window < 1:
            raise InputError(f"enh.window must be >= 1, got {self.window}")
        if int(self.levels) != self.levels or not 1 <= self.levels <= DTCWT_MAX_LEVELS:
            raise InputError(f"enh.levels must lie in 1..{DTCWT_MAX_LEVELS}, got {self.levels}")


@dataclass
class DseSchedule:
    """Growing structuring elements SE_1..SE_l and the stopping count"""
    elements: list
    t_final: int
    ed_reference: float = 0.0
    ed_trace: list = field(default_factory=list)

    def __len__(self):
        return len(self.elements)


def construct_dse(ls, cfg=None):
    cfg = cfg or EnhanceConfig()
    ls = np.asarray(ls, dtype=np.float64)
    se0 = make_se0(cfg.se0)
    _check_fits(ls, se0)

    ed_ref = edge_content(ls)
    tolerance = cfg.diff_max * ed_ref
    elements, trace = [], []
    for t in range(1, cfg.t_cap + 1):
        se = dilate_chain(se0, t)
        if not se.fits(ls):
            break
        elements.append(se)
        ls_en = ls + tophat_white(ls, se) - tophat_black(ls, se)
        ed = edge_content(scurve_transform(ls_en, window=cfg.window))
        trace.append(ed)
        if abs(ed - ed_ref) > tolerance:
            break

    logger.debug("D_SE stopped at t=%d (reference edge content %.4f)", len(elements), ed_ref)
    return DseSchedule(elements=elements, t_final=len(elements), ed_reference=ed_ref, ed_trace=trace)


def _max_increment(layers):
    if len(layers) < 2:
        return np.zeros_like(layers[0])
    return np.max(np.diff(np.stack(layers), axis=0), axis=0)


def enhance_lowpass(ls, schedule, k):
    """LS + k (max TH_W + max DTH_W - max TH_B - max DTH_B) over the schedule"""
    if not schedule.elements:
        raise InputError("structuring element schedule is empty")
    ls = np.asarray(ls, dtype=np.float64)
    if k == 0:
        return ls.copy()

    white = [tophat_white(ls, se) for se in schedule.elements]
    black = [tophat_black(ls, se) for se in schedule.elements]
    bright = np.max(white, axis=0) + _max_increment(white)
    dark = np.max(black, axis=0) + _max_increment(black)
    return ls + k * (bright - dark)


def enhance_with_report(img_pre, cfg=None):
    """Enhance one image and return it with its structuring-element schedule"""
    cfg = cfg or EnhanceConfig()
    gray = as_gray(img_pre)
    pyramid = dtcwt_forward(gray, cfg.levels)

    schedule = construct_dse(pyramid.ls_set, cfg)
    ls_final = enhance_lowpass(pyramid.ls_set, schedule, cfg.k)
    hs_clean = tuple(denoise_highpass(band, cfg.denoise) for band in pyramid.hs_set)

    restored = dtcwt_inverse(DtcwtPyramid(ls_set=ls_final, hs_set=hs_clean, shape=pyramid.shape))
    return to_uint8(restored), schedule


def enhance_image(img_pre, cfg=None):
    return enhance_with_report(img_pre, cfg)[0]
