"""Statistical texture features of level-2 Bior 6.8 DWT coefficients.

Each feature family is computed per coarsest-level sub-band (LL, LH, HL, HH)
and averaged across the four bands, giving one value per feature name.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats
from skimage.draw import line
from skimage.feature import graycomatrix

from retina.constants import FOS_NAMES, GLCM_NAMES, HOC_ANGLES, HOC_NAMES, HOS_NAMES
from retina.errors import InputError
from retina.imagecore import round_half_away
from retina.xforms import dwt2_bior68

logger = logging.getLogger(__name__)

ENTROPY_BINS = 256
PHASE_BINS = 9
# Peak-to-peak spread below this fraction of the magnitude counts as constant
FLAT_TOL = 1e-9


def _values(cf):
    x = np.asarray(cf, dtype=np.float64).ravel()
    if x.size == 0:
        raise InputError("empty input")
    if not np.all(np.isfinite(x)):
        raise InputError("coefficients hold non-finite values")
    return x


def is_flat(x):
    x = np.asarray(x, dtype=np.float64)
    return np.ptp(x) <= FLAT_TOL * max(1.0, float(np.abs(x).max()))


def histogram_entropy(x, bins=ENTROPY_BINS):
    """Shannon entropy in bits of the value histogram"""
    x = np.asarray(x, dtype=np.float64).ravel()
    if is_flat(x):
        return 0.0
    counts, _ = np.histogram(x, bins=bins)
    return float(stats.entropy(counts, base=2))


def first_order_stats(cf):
    """Mean, SD, entropy, RMS, variance, smoothness, kurtosis and skewness"""
    x = _values(cf)
    mean = float(np.mean(x))
    rms = float(np.sqrt(np.mean(x * x)))
    if is_flat(x):
        return {
            "Mean": mean, "SD": 0.0, "Entropy": 0.0, "RMS": rms, "Variance": 0.0,
            "Smoothness": 0.0, "Kurtosis": 0.0, "Skewness": 0.0,
        }
    var = float(np.var(x))
    return {
        "Mean": mean,
        "SD": float(np.sqrt(var)),
        "Entropy": histogram_entropy(x),
        "RMS": rms,
        "Variance": var,
        "Smoothness": 1.0 - 1.0 / (1.0 + var),
        "Kurtosis": float(stats.kurtosis(x, fisher=False, bias=True)),
        "Skewness": float(stats.skew(x, bias=True)),
    }


@dataclass(frozen=True)
class GlcmConfig:
    """Gray levels, pixel displacements (row, col) and symmetry of the co-occurrence count"""
    levels: int = 8
    offsets: tuple = ((0, 1), (1, 0), (1, 1), (1, -1))
    symmetric: bool = True

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 2:
            raise InputError(f"feat.glcm_levels must be >= 2, got {self.levels}")
        if not self.offsets:
            raise InputError("GLCM needs at least one offset")


def quantize(cf, levels):
    """Linear quantization of a real raster onto 0..levels-1"""
    x = np.asarray(cf, dtype=np.float64)
    if is_flat(x):
        return np.zeros(x.shape, dtype=np.uint8)
    scaled = (x - x.min()) / np.ptp(x) * levels
    return np.minimum(np.floor(scaled), levels - 1).astype(np.uint8)


def glcm_matrix(cf, cfg=None):
    """Normalized co-occurrence matrix averaged over the configured offsets"""
    cfg = cfg or GlcmConfig()
    x = np.asarray(cf, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise InputError("GLCM needs a non-empty 2-D raster")
    q = quantize(x, cfg.levels)

    mats = []
    for dr, dc in cfg.offsets:
        if abs(dr) >= x.shape[0] or abs(dc) >= x.shape[1]:
            raise InputError(f"image {x.shape} smaller than GLCM offset {(dr, dc)}")
        p = graycomatrix(
            q, distances=[np.hypot(dr, dc)], angles=[np.arctan2(dr, dc)],
            levels=cfg.levels, symmetric=cfg.symmetric, normed=True,
        )
        mats.append(p[:, :, 0, 0])
    return np.mean(mats, axis=0)


def glcm_features(cf, cfg=None):
    """IDM, contrast, energy (angular second moment) and homogeneity"""
    p = glcm_matrix(cf, cfg)
    i, j = np.indices(p.shape)
    diff = (i - j).astype(np.float64)
    return {
        "IDM": float(np.sum(p / (1.0 + diff * diff))),
        "Contrast": float(np.sum(p * diff * diff)),
        "Energy": float(np.sum(p * p)),
        "Homogeneity": float(np.sum(p / (1.0 + np.abs(diff)))),
    }


@dataclass(frozen=True)
class HocConfig:
    """Line directions in degrees and the largest cumulant lag"""
    angles: tuple = HOC_ANGLES
    max_lag: int = 8

    def __post_init__(self):
        if tuple(self.angles) != HOC_ANGLES:
            raise InputError(f"HOC angles must be exactly {HOC_ANGLES}")
        if int(self.max_lag) != self.max_lag or self.max_lag < 0:
            raise InputError(f"feat.hoc_max_lag must be >= 0, got {self.max_lag}")


def _direction(angle):
    # Lines are undirected: 180 degrees reads rows left to right like 0
    theta = np.deg2rad(angle % 180)
    # Rows grow downwards, so positive angles point up the raster
    return round(-np.sin(theta), 12), round(np.cos(theta), 12)


def _inside(r, c, rows, cols):
    return 0 <= r <= rows - 1 and 0 <= c <= cols - 1


def _exit_point(r, c, dr, dc, rows, cols):
    steps = []
    for pos, step, limit in ((r, dr, rows - 1), (c, dc, cols - 1)):
        if step > 0:
            steps.append((limit - pos) / step)
        elif step < 0:
            steps.append(-pos / step)
    s = min(steps)
    end_r = int(np.clip(round_half_away(r + s * dr), 0, rows - 1))
    end_c = int(np.clip(round_half_away(c + s * dc), 0, cols - 1))
    return end_r, end_c


def directional_lines(shape, angle):
    """Pixel index lines crossing a raster at the given angle, one per entry pixel"""
    rows, cols = shape
    dr, dc = _direction(angle)
    starts = [
        (r, c)
        for r in range(rows)
        for c in range(cols)
        if (r in (0, rows - 1) or c in (0, cols - 1)) and not _inside(r - dr, c - dc, rows, cols)
    ]
    lines = []
    for r, c in sorted(starts):
        end_r, end_c = _exit_point(r, c, dr, dc, rows, cols)
        lines.append(line(r, c, end_r, end_c))
    return lines


def directional_sequence(cf, angle):
    """Concatenated pixel values along every line at the given angle"""
    x = np.asarray(cf, dtype=np.float64)
    parts = [x[rr, cc] for rr, cc in directional_lines(x.shape, angle)]
    if not parts:
        raise InputError(f"raster {x.shape} too small for a line at {angle} degrees")
    return np.concatenate(parts)


def third_order_cumulant(seq, lag):
    """C3(lag, lag) of the zero-mean sequence"""
    x = np.asarray(seq, dtype=np.float64)
    x = x - x.mean()
    n = x.size - lag
    if n <= 0:
        raise InputError(f"sequence of length {x.size} too short for lag {lag}")
    return float(np.mean(x[:n] * x[lag:] ** 2))


def hoc_features(cf, cfg=None):
    """Mean third-order cumulant over lags, one value per direction"""
    cfg = cfg or HocConfig()
    x = np.asarray(cf, dtype=np.float64)
    if x.ndim != 2 or x.size < 2:
        raise InputError(f"raster {x.shape} too small for directional cumulants")
    out = {}
    for angle, name in zip(cfg.angles, HOC_NAMES):
        seq = directional_sequence(x, angle)
        if is_flat(seq):
            out[name] = 0.0
            continue
        lags = range(min(cfg.max_lag, seq.size - 1) + 1)
        out[name] = float(np.mean([third_order_cumulant(seq, lag) for lag in lags]))
    return out


def bispectrum(signal, nfft=64):
    """Direct estimate averaged over non-overlapping mean-removed segments"""
    x = np.asarray(signal, dtype=np.float64).ravel()
    if x.size == 0:
        raise InputError("empty input")
    if x.size < nfft:
        x = np.pad(x - x.mean(), (0, nfft - x.size))
    n_seg = x.size // nfft
    segments = x[: n_seg * nfft].reshape(n_seg, nfft)
    segments = segments - segments.mean(axis=1, keepdims=True)

    spectra = np.fft.fft(segments, axis=1)
    f = np.arange(nfft)
    f1, f2 = np.meshgrid(f, f, indexing="ij")
    triple = spectra[:, f1] * spectra[:, f2] * np.conj(spectra[:, (f1 + f2) % nfft])
    return triple.mean(axis=0)


def principal_domain(nfft):
    """Mask of the non-redundant bifrequencies 1 <= f2 <= f1, f1 + f2 <= nfft / 2"""
    f1, f2 = np.meshgrid(np.arange(nfft), np.arange(nfft), indexing="ij")
    return (f2 >= 1) & (f2 <= f1) & (f1 + f2 <= nfft // 2)


def _power_entropy(mag, degree):
    weights = mag ** degree
    total = weights.sum()
    if total <= 0:
        return 0.0
    return float(stats.entropy(weights / total))


def hos_features(cf, nfft=64):
    """Phase entropy, mean magnitude and degree-1..3 entropies of the row-mean bispectrum"""
    x = np.asarray(cf, dtype=np.float64)
    signal = x.mean(axis=1) if x.ndim == 2 else x.ravel()
    if signal.size == 0 or is_flat(signal):
        return dict.fromkeys(HOS_NAMES, 0.0)

    b = bispectrum(signal, nfft)[principal_domain(nfft)]
    mag = np.abs(b)
    counts, _ = np.histogram(np.angle(b), bins=PHASE_BINS, range=(-np.pi, np.pi))
    return {
        "Entropy_HoS": float(stats.entropy(counts)) if counts.sum() else 0.0,
        "Mean_HoS": float(mag.mean()),
        "Ent_dg1": _power_entropy(mag, 1),
        "Ent_dg2": _power_entropy(mag, 2),
        "Ent_dg3": _power_entropy(mag, 3),
    }


def statistical_features(img, glcm=None, hoc=None, nfft=64):
    """FoS, GLCM, HOC and HOS blocks of the feature vector, averaged over sub-bands"""
    bands = dwt2_bior68(img).subbands()
    per_band = []
    for band in bands:
        feats = first_order_stats(band)
        feats.update(glcm_features(band, glcm))
        feats.update(hoc_features(band, hoc))
        feats.update(hos_features(band, nfft))
        per_band.append(feats)

    names = FOS_NAMES + GLCM_NAMES + HOC_NAMES + HOS_NAMES
    return {name: float(np.mean([f[name] for f in per_band])) for name in names}
