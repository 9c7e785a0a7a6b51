"""Rasterization of vector scribble strokes into label maps.

Strokes arrive as polylines in image coordinates with a round brush of a
given radius. Strokes are painted in order, so where two strokes of
different classes overlap, the later one wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgio import UNLABELED, LabelMap


@dataclass
class Stroke:
    class_index: int
    points: list[tuple[float, float]]
    brush_radius: float = 2.0


def _stamp_disc(labels: np.ndarray, x: float, y: float, radius: float, cls: int) -> None:
    h, w = labels.shape
    # The pixel containing the point is always painted, even for tiny brushes.
    px, py = int(np.floor(x)), int(np.floor(y))
    if 0 <= px < w and 0 <= py < h:
        labels[py, px] = cls
    r = float(radius)
    if r <= 0:
        return
    x0, x1 = max(0, int(np.floor(x - r))), min(w - 1, int(np.ceil(x + r)))
    y0, y1 = max(0, int(np.floor(y - r))), min(h - 1, int(np.ceil(y + r)))
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1) + 0.5
    ys = np.arange(y0, y1 + 1) + 0.5
    mask = (xs[None, :] - x) ** 2 + (ys[:, None] - y) ** 2 <= r * r
    view = labels[y0 : y1 + 1, x0 : x1 + 1]
    view[mask] = cls


def rasterize_strokes(strokes: list[Stroke], width: int, height: int) -> LabelMap:
    """Paint strokes into a fresh label map (unpainted pixels UNLABELED)."""
    labels = np.full((height, width), UNLABELED, dtype=np.int16)
    for stroke in strokes:
        if stroke.class_index < 0:
            raise ValueError("stroke class must be a class index")
        pts = stroke.points
        if not pts:
            continue
        r = max(0.0, float(stroke.brush_radius))
        step = max(0.5, r * 0.5)
        _stamp_disc(labels, pts[0][0], pts[0][1], r, stroke.class_index)
        for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
            length = float(np.hypot(x2 - x1, y2 - y1))
            n = max(1, int(np.ceil(length / step)))
            for i in range(1, n + 1):
                t = i / n
                _stamp_disc(labels, x1 + t * (x2 - x1), y1 + t * (y2 - y1), r, stroke.class_index)
    return LabelMap(labels=labels)
