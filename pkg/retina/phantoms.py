"""Synthetic gray images standing in for retinal photographs in tests and demos."""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.ndimage import gaussian_filter

from retina.imagecore import save_image, to_uint8

logger = logging.getLogger(__name__)

PHANTOM_DATASET = "PHANTOM"


def _grid(size):
    return np.mgrid[0:size, 0:size].astype(np.float64)


def low_contrast_phantom(size=64, seed=0, lo=40, hi=90):
    """Dark, smooth image squeezed into a narrow intensity band"""
    rng = np.random.default_rng(seed)
    field = gaussian_filter(rng.normal(size=(size, size)), sigma=size / 8, mode="wrap")
    field = (field - field.min()) / max(np.ptp(field), 1e-12)
    return to_uint8(lo + (hi - lo) * field)


def ridge_phantom(size=128, seed=0, background=70.0, amplitude=70.0, width=2.0, count=5):
    """Vessel-like bright ridges along gently curving paths"""
    rng = np.random.default_rng(seed)
    rows, cols = _grid(size)
    img = np.full((size, size), background)
    for _ in range(count):
        offset = rng.uniform(0.15, 0.85) * size
        bend = rng.uniform(4.0, 10.0)
        period = rng.uniform(0.5, 1.5) * size
        phase = rng.uniform(0, 2 * np.pi)
        if rng.random() < 0.5:
            centre = offset + bend * np.sin(2 * np.pi * cols / period + phase)
            dist = rows - centre
        else:
            centre = offset + bend * np.sin(2 * np.pi * rows / period + phase)
            dist = cols - centre
        img = np.maximum(img, background + amplitude * np.exp(-dist * dist / (2 * width * width)))
    return to_uint8(img)


def disc_phantom(size=64, radius=None, inside=180.0, outside=60.0):
    """Bright disc on a dark background with a one-pixel soft rim"""
    radius = radius or size / 4
    rows, cols = _grid(size)
    r = np.hypot(rows - (size - 1) / 2, cols - (size - 1) / 2)
    weight = np.clip(radius + 0.5 - r, 0.0, 1.0)
    return to_uint8(outside + (inside - outside) * weight)


def bright_spot_phantom(size=16, background=50.0, spot=150.0):
    """Flat raster with one bright 2x2 spot at the centre"""
    img = np.full((size, size), background)
    c = size // 2
    img[c - 1:c + 1, c - 1:c + 1] = spot
    return img


def texture_phantom(label, size=64, seed=0):
    """Two-class texture: fine grain for normal, coarse grain and a larger cup for glaucoma"""
    rng = np.random.default_rng(seed)
    glaucoma = label == "glaucoma"
    grain = rng.uniform(2.6, 3.4) if glaucoma else rng.uniform(0.8, 1.2)
    texture = gaussian_filter(rng.normal(size=(size, size)), sigma=grain, mode="wrap")
    texture /= max(texture.std(), 1e-12)

    rows, cols = _grid(size)
    r = np.hypot(rows - size / 2, cols - size / 2)
    cup = (0.30 if glaucoma else 0.15) * size * rng.uniform(0.9, 1.1)
    disc = 40.0 * np.clip(cup + 0.5 - r, 0.0, 1.0)
    return to_uint8(70.0 + 15.0 * texture + disc)


def write_phantom_set(out_dir, count=200, seed=0, size=64):
    """Write a balanced two-class phantom set and its manifest"""
    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    image_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 31 - 1, size=count)

    rows = []
    for i, image_seed in enumerate(seeds):
        label = "glaucoma" if i % 2 else "normal"
        name = f"phantom_{i:04d}.png"
        save_image(texture_phantom(label, size, int(image_seed)), image_dir / name)
        rows.append({"path": f"images/{name}", "label": label, "dataset": PHANTOM_DATASET})

    manifest = out_dir / "manifest.csv"
    pd.DataFrame(rows, columns=["path", "label", "dataset"]).to_csv(
        manifest, index=False, lineterminator="\n"
    )
    logger.info("Wrote %d phantom images to %s", count, image_dir)
    return manifest
