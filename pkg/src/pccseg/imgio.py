"""Image, scribble, ground-truth and cut-polygon I/O.

All file formats are documented in docs/FORMATS.md. Label maps use two
sentinel values: ``UNLABELED`` for pixels without an annotation and
``IGNORE`` for ground-truth pixels excluded from error computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

UNLABELED = -1
IGNORE = -2

# Fixed scribble palette: class index -> opaque RGBA color. Class 0 is
# background (red), class 1 the object (green); further classes follow.
SCRIBBLE_PALETTE = (
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (255, 128, 0),
    (255, 255, 255),
)

# Translucent class tints used by save_overlay (same order as the palette).
OVERLAY_ALPHA = 0.4
ERROR_COLOR = (255, 0, 0)


@dataclass
class ImageBuffer:
    """8-bit RGB raster stored as a (height, width, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ValueError("image data must have shape (height, width, 3)")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass
class LabelMap:
    """Per-pixel class annotation as a (height, width) int16 array.

    Entries are class indices >= 0, UNLABELED, or IGNORE. IGNORE may only
    appear in ground-truth maps, never in scribble maps.
    """

    labels: np.ndarray

    def __post_init__(self) -> None:
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int16)
        if self.labels.ndim != 2:
            raise ValueError("label map must be 2-dimensional")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def num_classes(self) -> int:
        """Number of classes implied by the highest class index present."""
        m = int(self.labels.max(initial=-1))
        return m + 1 if m >= 0 else 0


def _orientation(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    # Assumes p collinear with segment (a, b).
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_cross(p1, p2, p3, p4) -> bool:
    """True if segments (p1,p2) and (p3,p4) share any point."""
    d1 = _orientation(*p3, *p4, *p1)
    d2 = _orientation(*p3, *p4, *p2)
    d3 = _orientation(*p1, *p2, *p3)
    d4 = _orientation(*p1, *p2, *p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if d2 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    return False


@dataclass
class CutPolygon:
    """Simple polygon in pixel coordinates of the original image.

    Vertices are (x, y) pairs; the polygon is closed implicitly. The
    constructor rejects polygons with fewer than 3 vertices, zero-length
    edges, and self-intersections.
    """

    vertices: np.ndarray = field()

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("polygon vertices must be (x, y) pairs")
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        self._check_simple()

    def _check_simple(self) -> None:
        v = self.vertices
        m = len(v)
        segs = [(tuple(v[i]), tuple(v[(i + 1) % m])) for i in range(m)]
        for a, b in segs:
            if a == b:
                raise ValueError("polygon has a zero-length edge")
        for i in range(m):
            for j in range(i + 1, m):
                adjacent = (j == i + 1) or (i == 0 and j == m - 1)
                a, b = segs[i]
                c, d = segs[j]
                if adjacent:
                    # Consecutive edges share one endpoint; reject only if
                    # they overlap beyond it (a spike folding back).
                    shared = b if j == i + 1 else a
                    other_i = a if shared == b else b
                    other_j = d if shared == c else c
                    if _orientation(*shared, *other_i, *other_j) == 0:
                        di = (other_i[0] - shared[0], other_i[1] - shared[1])
                        dj = (other_j[0] - shared[0], other_j[1] - shared[1])
                        if di[0] * dj[0] + di[1] * dj[1] > 0:
                            raise ValueError("polygon is self-intersecting")
                    continue
                if _segments_cross(a, b, c, d):
                    raise ValueError("polygon is self-intersecting")

    def contains_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Even-odd point-in-polygon test, vectorized over query points."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        inside = np.zeros(xs.shape, dtype=bool)
        v = self.vertices
        m = len(v)
        for i in range(m):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % m]
            crosses = (y1 > ys) != (y2 > ys)
            with np.errstate(invalid="ignore", divide="ignore"):
                xint = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
            inside ^= crosses & (xs < xint)
        return inside

    def bounding_box(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return (
            float(v[:, 0].min()),
            float(v[:, 1].min()),
            float(v[:, 0].max()),
            float(v[:, 1].max()),
        )


def load_image(path: str | Path) -> ImageBuffer:
    """Load a PNG or JPEG file as an 8-bit RGB buffer.

    Alpha channels are discarded, grayscale is expanded to RGB, and
    16-bit channels are truncated to their high byte.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image file not found: {path}")
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise ValueError(f"unsupported format {im.format!r}: {path}")
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im).astype(np.uint32)
                gray = (arr >> 8).astype(np.uint8)
                data = np.repeat(gray[:, :, None], 3, axis=2)
            else:
                if mode not in ("RGB", "RGBA", "L", "LA"):
                    im = im.convert("RGB")
                    mode = "RGB"
                arr = np.asarray(im)
                if mode == "RGB":
                    data = arr
                elif mode == "RGBA":
                    data = arr[:, :, :3]
                elif mode == "L":
                    data = np.repeat(arr[:, :, None], 3, axis=2)
                else:  # LA
                    data = np.repeat(arr[:, :, :1], 3, axis=2)
    except UnidentifiedImageError as exc:
        raise ValueError(f"decode failure: {path}") from exc
    except OSError as exc:
        raise ValueError(f"decode failure: {path}: {exc}") from exc
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise ValueError(f"zero-dimension image: {path}")
    return ImageBuffer(data=data)


def load_scribbles(path: str | Path, num_classes: int) -> LabelMap:
    """Load an RGBA PNG scribble annotation.

    Fully transparent pixels (alpha 0) are UNLABELED. Any pixel with
    nonzero alpha must match the fixed scribble palette for a class index
    below ``num_classes``.
    """
    if num_classes < 1 or num_classes > len(SCRIBBLE_PALETTE):
        raise ValueError(f"num_classes must be in [1, {len(SCRIBBLE_PALETTE)}]")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scribble file not found: {path}")
    try:
        with Image.open(path) as im:
            if im.format != "PNG" or im.mode != "RGBA":
                raise ValueError(f"scribbles must be an RGBA PNG: {path}")
            arr = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise ValueError(f"decode failure: {path}") from exc

    labels = np.full(arr.shape[:2], UNLABELED, dtype=np.int16)
    opaque = arr[:, :, 3] > 0
    if opaque.any():
        rgb = arr[:, :, 0].astype(np.int32) * 65536 + arr[:, :, 1].astype(np.int32) * 256 + arr[:, :, 2]
        lookup = {r * 65536 + g * 256 + b: c for c, (r, g, b) in enumerate(SCRIBBLE_PALETTE[:num_classes])}
        keys = rgb[opaque]
        mapped = np.full(keys.shape, UNLABELED, dtype=np.int16)
        for key, cls in lookup.items():
            mapped[keys == key] = cls
        if (mapped == UNLABELED).any():
            bad = int(keys[mapped == UNLABELED][0])
            r, g, b = bad >> 16, (bad >> 8) & 255, bad & 255
            raise ValueError(f"unknown scribble color ({r},{g},{b}) in {path}")
        labels[opaque] = mapped
    return LabelMap(labels=labels)


def save_scribbles(labels: LabelMap, path: str | Path) -> None:
    """Write a scribble map as an RGBA PNG (UNLABELED pixels transparent)."""
    if (labels.labels == IGNORE).any():
        raise ValueError("scribble maps may not contain IGNORE")
    h, w = labels.labels.shape
    out = np.zeros((h, w, 4), dtype=np.uint8)
    for c, (r, g, b) in enumerate(SCRIBBLE_PALETTE):
        mask = labels.labels == c
        out[mask] = (r, g, b, 255)
    Image.fromarray(out, mode="RGBA").save(path)


def load_ground_truth(path: str | Path) -> LabelMap:
    """Load a grayscale PNG trimap.

    Value 0 is class 0 (background), 255 is class 1 (object), and any
    other gray value becomes IGNORE (annotator-divergence pixels).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ground-truth file not found: {path}")
    try:
        with Image.open(path) as im:
            if im.mode == "1":
                im = im.convert("L")
            if im.mode != "L":
                raise ValueError(f"ground truth must be a grayscale PNG, got mode {im.mode!r}: {path}")
            arr = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise ValueError(f"decode failure: {path}") from exc
    labels = np.full(arr.shape, IGNORE, dtype=np.int16)
    labels[arr == 0] = 0
    labels[arr == 255] = 1
    return LabelMap(labels=labels)


def load_polygon(path: str | Path) -> CutPolygon:
    """Load a cut polygon from a JSON array of [x, y] pairs."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"polygon file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed polygon JSON: {path}: {exc}") from exc
    if not isinstance(raw, list) or any(
        not isinstance(p, (list, tuple)) or len(p) != 2 or not all(isinstance(v, (int, float)) for v in p)
        for p in raw
    ):
        raise ValueError(f"polygon file must contain a JSON array of [x, y] pairs: {path}")
    return CutPolygon(vertices=np.asarray(raw, dtype=np.float64))


def mask_values(num_classes: int) -> np.ndarray:
    """Grayscale value for each class in a saved mask (0..255 ramp)."""
    if num_classes < 2:
        return np.array([0], dtype=np.uint8)
    return np.round(np.arange(num_classes) * 255.0 / (num_classes - 1)).astype(np.uint8)


def save_mask(labels: LabelMap, path: str | Path) -> None:
    """Write a label map as a grayscale PNG (class 0 -> 0, last class -> 255)."""
    if (labels.labels < 0).any():
        raise ValueError("mask contains UNLABELED or IGNORE pixels")
    num_classes = max(labels.num_classes(), 2)
    values = mask_values(num_classes)
    out = values[labels.labels]
    Image.fromarray(out, mode="L").save(path, format="PNG")


def save_overlay(
    image: ImageBuffer,
    labels: LabelMap,
    path: str | Path,
    ground_truth: LabelMap | None = None,
) -> None:
    """Write the image tinted by predicted class, errors in solid red.

    When ``ground_truth`` is given, pixels whose label disagrees with a
    non-IGNORE ground-truth entry are painted solid red.
    """
    if (labels.labels < 0).any():
        raise ValueError("overlay labels contain UNLABELED or IGNORE pixels")
    if labels.labels.shape != image.data.shape[:2]:
        raise ValueError("overlay label dimensions do not match the image")
    palette = np.asarray(SCRIBBLE_PALETTE, dtype=np.float64)
    tint = palette[np.clip(labels.labels, 0, len(SCRIBBLE_PALETTE) - 1)]
    out = (1.0 - OVERLAY_ALPHA) * image.data.astype(np.float64) + OVERLAY_ALPHA * tint
    if ground_truth is not None:
        if ground_truth.labels.shape != labels.labels.shape:
            raise ValueError("ground-truth dimensions do not match the labels")
        wrong = (ground_truth.labels != IGNORE) & (ground_truth.labels != labels.labels)
        out[wrong] = ERROR_COLOR
    Image.fromarray(np.clip(np.round(out), 0, 255).astype(np.uint8), mode="RGB").save(path, format="PNG")
