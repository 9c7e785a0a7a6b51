"""Per-pixel feature extraction and z-normalization.

Two feature sets are supported: the compact 10-feature set
(location, RGB, HSV value, excess colors, Otsu bit) and the legacy
23-feature set (location, RGB, HSV, 3x3 neighborhood mean/std of RGB and
HSV, excess colors).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .imgio import ImageBuffer

# ITU-R BT.601 luma weights for the grayscale image fed to Otsu.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class FeatureMode(str, Enum):
    PROPOSED = "proposed"
    REFERENCE = "reference"


@dataclass
class FeatureMatrix:
    """n x d feature matrix, one row per pixel in raster order."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-dimensional")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def hsv_value(r: float, g: float, b: float) -> float:
    """V component of HSV: max channel scaled to [0, 1]."""
    return max(r, g, b) / 255.0


def excess_colors(r: float, g: float, b: float) -> tuple[float, float, float]:
    """Excess color components (ExR, ExG, ExB) on raw 0-255 channels.

    ExR = 1.4R - G, ExG = 2G - R - B, ExB = 1.4B - G. The scale is
    irrelevant downstream because features are z-normalized.
    """
    return (1.4 * r - g, 2.0 * g - r - b, 1.4 * b - g)


def otsu_threshold(histogram: np.ndarray) -> int:
    """Threshold maximizing between-class variance over a 256-bin histogram.

    Ties are broken by the smallest threshold. A histogram with a single
    occupied bin has no informative split; its bin index is returned so
    every pixel binarizes to 0.
    """
    hist = np.asarray(histogram, dtype=np.float64)
    if hist.shape != (256,):
        raise ValueError("histogram must have 256 bins")
    total = hist.sum()
    if total <= 0:
        raise ValueError("histogram is empty")

    bins = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * bins)
    w1 = total - w0
    mean_total = m0[-1]
    # Between-class variance for threshold t (class 0 = bins <= t).
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = m0 / w0
        mu1 = (mean_total - m0) / w1
        bcv = w0 * w1 * (mu0 - mu1) ** 2
    bcv[~np.isfinite(bcv)] = 0.0
    best = float(bcv.max())
    if best <= 0.0:
        return int(np.flatnonzero(hist)[0])
    return int(np.argmax(bcv))


def _rgb_to_hsv_planes(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone HSV planes in [0, 1) / [0, 1] / [0, 1] from uint8 RGB."""
    rgb = data.astype(np.float64) / 255.0
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    delta = mx - mn
    h = np.zeros_like(mx)
    nz = delta > 0
    rmax = nz & (mx == r)
    gmax = nz & ~rmax & (mx == g)
    bmax = nz & ~rmax & ~gmax
    h[rmax] = ((g - b)[rmax] / delta[rmax]) % 6.0
    h[gmax] = (b - r)[gmax] / delta[gmax] + 2.0
    h[bmax] = (r - g)[bmax] / delta[bmax] + 4.0
    h /= 6.0
    s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    return h, s, mx


def _window_mean_std(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population std over each pixel's 3x3 window, clipped at borders."""
    h, w = plane.shape
    acc = np.zeros((h, w), dtype=np.float64)
    acc_sq = np.zeros((h, w), dtype=np.float64)
    count = np.zeros((h, w), dtype=np.float64)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            rs_dst = slice(max(0, -dr), h - max(0, dr))
            cs_dst = slice(max(0, -dc), w - max(0, dc))
            rs_src = slice(max(0, dr), h - max(0, -dr))
            cs_src = slice(max(0, dc), w - max(0, -dc))
            shifted = plane[rs_src, cs_src]
            acc[rs_dst, cs_dst] += shifted
            acc_sq[rs_dst, cs_dst] += shifted * shifted
            count[rs_dst, cs_dst] += 1.0
    mean = acc / count
    var = acc_sq / count - mean * mean
    return mean, np.sqrt(np.maximum(var, 0.0))


def grayscale(image: ImageBuffer) -> np.ndarray:
    """BT.601 luma, rounded to uint8."""
    wr, wg, wb = LUMA_WEIGHTS
    data = image.data.astype(np.float64)
    gray = wr * data[:, :, 0] + wg * data[:, :, 1] + wb * data[:, :, 2]
    return np.clip(np.round(gray), 0, 255).astype(np.uint8)


def otsu_bits(image: ImageBuffer) -> np.ndarray:
    """Binarized plane: 1 where luma exceeds the Otsu threshold."""
    gray = grayscale(image)
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    t = otsu_threshold(hist)
    return (gray > t).astype(np.float64)


def extract_features(image: ImageBuffer, mode: FeatureMode) -> FeatureMatrix:
    """Extract the unnormalized feature matrix, one row per pixel.

    Row order is raster order (row-major). Proposed rows are
    [row, col, R, G, B, V, ExR, ExG, ExB, otsu]; reference rows are
    [row, col, R, G, B, H, S, V, mean(RGBHSV), std(RGBHSV), ExR, ExG, ExB]
    with means/stds over the pixel's 3x3 neighborhood.
    """
    h, w = image.height, image.width
    data = image.data.astype(np.float64)
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    r, g, b = data[:, :, 0], data[:, :, 1], data[:, :, 2]
    exr = 1.4 * r - g
    exg = 2.0 * g - r - b
    exb = 1.4 * b - g

    if mode == FeatureMode.PROPOSED:
        v = data.max(axis=2) / 255.0
        planes = [rows, cols, r, g, b, v, exr, exg, exb, otsu_bits(image)]
    elif mode == FeatureMode.REFERENCE:
        hh, ss, vv = _rgb_to_hsv_planes(image.data)
        planes = [rows, cols, r, g, b, hh, ss, vv]
        stds = []
        for plane in (r, g, b, hh, ss, vv):
            mean, std = _window_mean_std(plane)
            planes.append(mean)
            stds.append(std)
        planes.extend(stds)
        planes.extend([exr, exg, exb])
    else:
        raise ValueError(f"unknown feature mode: {mode!r}")

    values = np.stack([p.ravel() for p in planes], axis=1)
    return FeatureMatrix(values=values, normalized=False)


def z_normalize(m: FeatureMatrix) -> FeatureMatrix:
    """Z-score each column with the population standard deviation.

    Constant columns carry no information and become all-zero instead of
    producing NaN distances. The operation is idempotent.
    """
    if m.n == 0:
        raise ValueError("cannot normalize an empty feature matrix")
    mean = m.values.mean(axis=0)
    std = m.values.std(axis=0)
    centered = m.values - mean
    out = np.where(std > 0, centered / np.where(std > 0, std, 1.0), 0.0)
    return FeatureMatrix(values=out, normalized=True)
