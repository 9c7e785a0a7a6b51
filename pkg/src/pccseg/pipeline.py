"""End-to-end segmentation pipeline.

Stages: optional polygon crop, bicubic reduction of the working image
(nearest-neighbor for the annotations, so labels are never blended),
feature extraction, network construction, particle dynamics, then
bilinear recomposition of the per-class domination maps back to full
resolution where the final per-pixel argmax happens.

The reduction factor is always computed from the full image, so a
polygon crop yields a proportionally smaller network instead of being
scaled back up to the pixel budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .engine import EngineConfig, RunStats
from .features import FeatureMode, extract_features, z_normalize
from .imgio import IGNORE, CutPolygon, ImageBuffer, LabelMap
from .netbuild import K_PROPOSED, build_network, initial_state, seed_influence


class SegmentationError(ValueError):
    """Raised when the pipeline cannot run on the given inputs."""


@dataclass
class PipelineConfig:
    mode: FeatureMode = FeatureMode.PROPOSED
    max_pixels: int = 18_000
    engine: EngineConfig = field(default_factory=EngineConfig)
    background_class: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.mode, str):
            self.mode = FeatureMode(self.mode)
        if self.max_pixels <= K_PROPOSED:
            raise ValueError(f"max_pixels must exceed {K_PROPOSED}")
        if self.background_class < 0:
            raise ValueError("background_class must be a class index")


@dataclass
class Placement:
    """Where the working crop sits inside the full image."""

    x0: int
    y0: int
    crop_w: int
    crop_h: int
    full_w: int
    full_h: int

    @property
    def is_identity(self) -> bool:
        return (self.x0, self.y0) == (0, 0) and (self.crop_w, self.crop_h) == (self.full_w, self.full_h)


@dataclass
class ScaleRecord:
    """Dimensions before and after the reduction step."""

    src_w: int
    src_h: int
    out_w: int
    out_h: int

    @property
    def is_identity(self) -> bool:
        return (self.src_w, self.src_h) == (self.out_w, self.out_h)


@dataclass
class SegmentationResult:
    full_res_labels: LabelMap
    fuzzy: np.ndarray
    stats: RunStats
    network_nodes: int
    network_edges: int


def _cubic_weights(frac: np.ndarray) -> np.ndarray:
    """Catmull-Rom (a = -0.5) weights for taps at offsets -1, 0, 1, 2."""
    a = -0.5
    x = np.stack([frac + 1.0, frac, 1.0 - frac, 2.0 - frac], axis=1)
    w = np.where(
        x <= 1.0,
        (a + 2.0) * x**3 - (a + 3.0) * x**2 + 1.0,
        a * x**3 - 5.0 * a * x**2 + 8.0 * a * x - 4.0 * a,
    )
    return w


def _resample_axis(arr: np.ndarray, out_len: int, axis: int, taps: int) -> np.ndarray:
    """Separable 1-D resample along ``axis`` (taps=4 cubic, taps=2 linear)."""
    in_len = arr.shape[axis]
    if out_len == in_len:
        return arr
    x = (np.arange(out_len) + 0.5) * (in_len / out_len) - 0.5
    base = np.floor(x).astype(np.int64)
    frac = x - base
    if taps == 4:
        weights = _cubic_weights(frac)
        offsets = (-1, 0, 1, 2)
    else:
        weights = np.stack([1.0 - frac, frac], axis=1)
        offsets = (0, 1)
    moved = np.moveaxis(arr, axis, 0)
    out = np.zeros((out_len,) + moved.shape[1:], dtype=np.float64)
    for t, off in enumerate(offsets):
        idx = np.clip(base + off, 0, in_len - 1)
        w = weights[:, t].reshape((out_len,) + (1,) * (moved.ndim - 1))
        out += w * moved[idx]
    return np.moveaxis(out, 0, axis)


def resize_bicubic(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Catmull-Rom bicubic resize of an (h, w[, c]) array to (out_h, out_w)."""
    out = _resample_axis(data.astype(np.float64), out_h, 0, taps=4)
    return _resample_axis(out, out_w, 1, taps=4)


def resize_bilinear(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of an (h, w[, c]) array to (out_h, out_w)."""
    out = _resample_axis(data.astype(np.float64), out_h, 0, taps=2)
    return _resample_axis(out, out_w, 1, taps=2)


def nearest_index_map(in_len: int, out_len: int) -> np.ndarray:
    """Source index sampled by each output position (no blending)."""
    idx = np.floor((np.arange(out_len) + 0.5) * (in_len / out_len)).astype(np.int64)
    return np.clip(idx, 0, in_len - 1)


def crop_to_polygon(
    image: ImageBuffer,
    scribbles: LabelMap,
    poly: CutPolygon,
    background_class: int = 0,
) -> tuple[ImageBuffer, LabelMap, Placement]:
    """Crop to the polygon's bounding box, labeling outside as background.

    Pixels inside the box but outside the polygon are excluded from the
    object by construction, so their scribble entry is forced to the
    background class.
    """
    h, w = image.height, image.width
    minx, miny, maxx, maxy = poly.bounding_box()
    if minx < 0 or miny < 0 or maxx > w or maxy > h:
        raise SegmentationError("polygon extends outside the image")
    x0 = int(math.floor(minx))
    y0 = int(math.floor(miny))
    x1 = min(w, int(math.ceil(maxx)))
    y1 = min(h, int(math.ceil(maxy)))
    if x1 - x0 < 2 or y1 - y0 < 2:
        raise SegmentationError("polygon bounding box is degenerate")

    crop_img = ImageBuffer(data=image.data[y0:y1, x0:x1].copy())
    crop_scr = LabelMap(labels=scribbles.labels[y0:y1, x0:x1].copy())
    ys, xs = np.mgrid[y0:y1, x0:x1]
    inside = poly.contains_points(xs + 0.5, ys + 0.5)
    crop_scr.labels[~inside] = background_class
    placement = Placement(x0=x0, y0=y0, crop_w=x1 - x0, crop_h=y1 - y0, full_w=w, full_h=h)
    return crop_img, crop_scr, placement


def _apply_scale(
    image: ImageBuffer, scribbles: LabelMap, scale: float
) -> tuple[ImageBuffer, LabelMap, ScaleRecord]:
    h, w = image.height, image.width
    if scale >= 1.0:
        return image, scribbles, ScaleRecord(w, h, w, h)
    out_w = max(1, int(math.floor(w * scale)))
    out_h = max(1, int(math.floor(h * scale)))
    small = np.clip(np.round(resize_bicubic(image.data, out_h, out_w)), 0, 255).astype(np.uint8)
    rows = nearest_index_map(h, out_h)
    cols = nearest_index_map(w, out_w)
    small_labels = scribbles.labels[rows[:, None], cols[None, :]]
    record = ScaleRecord(src_w=w, src_h=h, out_w=out_w, out_h=out_h)
    return ImageBuffer(data=small), LabelMap(labels=small_labels), record


def downscale(
    image: ImageBuffer, scribbles: LabelMap, max_pixels: int
) -> tuple[ImageBuffer, LabelMap, ScaleRecord]:
    """Reduce to at most max_pixels pixels (identity when already small).

    The image is resampled with the Catmull-Rom bicubic kernel; the
    annotation map samples its nearest source pixel so no labels blend.
    """
    if max_pixels <= K_PROPOSED:
        raise ValueError(f"max_pixels must exceed {K_PROPOSED}")
    px = image.width * image.height
    scale = 1.0 if px <= max_pixels else math.sqrt(max_pixels / px)
    return _apply_scale(image, scribbles, scale)


def recompose(
    fuzzy_small: np.ndarray,
    scale: ScaleRecord,
    placement: Placement,
    background_class: int = 0,
) -> tuple[LabelMap, np.ndarray]:
    """Upscale per-class domination maps to full resolution and classify.

    Each class map is bilinearly interpolated to the crop size and the
    per-pixel distribution renormalized; argmax (lowest class on ties)
    gives the crop labels, which are placed into the full canvas with
    everything outside the crop set to the background class.
    """
    crop_h, crop_w = scale.src_h, scale.src_w
    if scale.is_identity:
        fuzzy_crop = fuzzy_small.astype(np.float64)
    else:
        fuzzy_crop = resize_bilinear(fuzzy_small, crop_h, crop_w)
    sums = fuzzy_crop.sum(axis=2, keepdims=True)
    fuzzy_crop = np.where(sums > 0, fuzzy_crop / np.where(sums > 0, sums, 1.0), 1.0 / fuzzy_crop.shape[2])
    crop_labels = np.argmax(fuzzy_crop, axis=2).astype(np.int16)

    full_labels = np.full((placement.full_h, placement.full_w), background_class, dtype=np.int16)
    full_fuzzy = np.zeros((placement.full_h, placement.full_w, fuzzy_crop.shape[2]), dtype=np.float64)
    full_fuzzy[:, :, background_class] = 1.0
    ys = slice(placement.y0, placement.y0 + placement.crop_h)
    xs = slice(placement.x0, placement.x0 + placement.crop_w)
    full_labels[ys, xs] = crop_labels
    full_fuzzy[ys, xs] = fuzzy_crop
    return LabelMap(labels=full_labels), full_fuzzy


def _validate_classes(labels: np.ndarray, where: str) -> int:
    present = np.unique(labels[labels >= 0])
    if len(present) < 2:
        raise SegmentationError("need at least two classes of scribbles" + where)
    num_classes = int(present.max()) + 1
    for cls in range(num_classes):
        if cls not in present:
            raise SegmentationError(f"class {cls} has no scribbles{where}")
    return num_classes


def segment(
    image: ImageBuffer,
    scribbles: LabelMap,
    polygon: CutPolygon | None = None,
    cfg: PipelineConfig | None = None,
    progress=None,
    check_conservation: bool = False,
) -> SegmentationResult:
    """Run the full pipeline on one image; deterministic per seed."""
    cfg = cfg or PipelineConfig()
    if scribbles.labels.shape != image.data.shape[:2]:
        raise SegmentationError("scribble dimensions do not match the image")
    if (scribbles.labels == IGNORE).any():
        raise SegmentationError("scribbles may not contain IGNORE")
    num_classes = _validate_classes(scribbles.labels, "")
    if cfg.background_class >= num_classes:
        raise SegmentationError("background_class is not a scribbled class")

    if polygon is not None:
        work_img, work_scr, placement = crop_to_polygon(image, scribbles, polygon, cfg.background_class)
    else:
        work_img, work_scr = image, scribbles
        placement = Placement(0, 0, image.width, image.height, image.width, image.height)

    full_px = image.width * image.height
    scale = 1.0 if full_px <= cfg.max_pixels else math.sqrt(cfg.max_pixels / full_px)
    small_img, small_scr, scale_record = _apply_scale(work_img, work_scr, scale)

    present = np.unique(small_scr.labels[small_scr.labels >= 0])
    if len(present) < num_classes:
        raise SegmentationError(
            "scribbles lost in downscale; increase max_pixels or thicken the annotations"
        )

    feats = z_normalize(extract_features(small_img, cfg.mode))
    hs, ws = small_img.height, small_img.width
    rows, cols = np.divmod(np.arange(hs * ws), ws)
    coords = np.stack([rows, cols], axis=1).astype(np.int32)
    node_label = small_scr.labels.ravel()

    net = build_network(feats, coords, node_label, cfg.mode, num_classes)
    seeded = seed_influence(net) if cfg.mode == FeatureMode.PROPOSED else initial_state(net)
    state, stats = engine.run(net, seeded, cfg.engine, progress=progress, check_conservation=check_conservation)

    fuzzy_small = state.reshape(hs, ws, num_classes)
    full_labels, full_fuzzy = recompose(fuzzy_small, scale_record, placement, cfg.background_class)
    return SegmentationResult(
        full_res_labels=full_labels,
        fuzzy=full_fuzzy,
        stats=stats,
        network_nodes=net.n,
        network_edges=net.edge_count,
    )


def error_rate(predicted: LabelMap, gt: LabelMap) -> float:
    """Fraction of misclassified pixels among non-IGNORE ground truth."""
    if predicted.labels.shape != gt.labels.shape:
        raise ValueError("prediction and ground truth dimensions differ")
    evaluable = gt.labels != IGNORE
    total = int(evaluable.sum())
    if total == 0:
        raise ValueError("no evaluable pixels (all IGNORE)")
    wrong = int((predicted.labels[evaluable] != gt.labels[evaluable]).sum())
    return wrong / total
