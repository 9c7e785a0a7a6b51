import numpy as np

from pccseg.imgio import UNLABELED
from pccseg.strokes import Stroke, rasterize_strokes


def test_every_stroke_point_pixel_is_labeled():
    strokes = [Stroke(class_index=1, points=[(3.2, 4.9), (10.7, 4.1)], brush_radius=0.4)]
    labels = rasterize_strokes(strokes, 16, 12).labels
    assert labels[4, 3] == 1
    assert labels[4, 10] == 1


def test_round_brush_geometry():
    strokes = [Stroke(class_index=0, points=[(8.0, 8.0)], brush_radius=3.0)]
    labels = rasterize_strokes(strokes, 16, 16).labels
    ys, xs = np.nonzero(labels == 0)
    dists = np.hypot(xs + 0.5 - 8.0, ys + 0.5 - 8.0)
    assert dists.max() <= 3.0 + 1e-9
    assert labels[8, 8] == 0
    assert labels[8, 5] == 0  # center distance 2.5 < r
    assert labels[8, 4] == UNLABELED  # center distance 3.5 > r


def test_later_stroke_wins_on_overlap():
    strokes = [
        Stroke(class_index=0, points=[(5, 5), (12, 5)], brush_radius=2.0),
        Stroke(class_index=1, points=[(8, 5)], brush_radius=2.0),
    ]
    labels = rasterize_strokes(strokes, 20, 10).labels
    assert labels[5, 8] == 1
    assert labels[5, 5] == 0
    assert labels[5, 12] == 0


def test_segment_band_is_continuous():
    strokes = [Stroke(class_index=1, points=[(2.0, 2.0), (17.0, 9.0)], brush_radius=1.5)]
    labels = rasterize_strokes(strokes, 20, 12).labels
    painted = np.argwhere(labels == 1)
    assert len(painted) > 10
    # Along the segment, every sampled point's pixel is painted.
    for t in np.linspace(0, 1, 50):
        x = 2.0 + t * 15.0
        y = 2.0 + t * 7.0
        assert labels[int(y), int(x)] == 1


def test_empty_and_out_of_bounds_strokes():
    strokes = [
        Stroke(class_index=0, points=[], brush_radius=2.0),
        Stroke(class_index=1, points=[(-50.0, -50.0)], brush_radius=2.0),
    ]
    labels = rasterize_strokes(strokes, 8, 8).labels
    assert (labels == UNLABELED).all()
