"""Deterministic synthetic scenes for demos, tests and benchmarking.

Two generators: a plain two-color-block image with a handful of scribble
pixels per class, and a textured scene with an irregular blob object on a
noisy gradient background, complete with scribble strokes, a star-shaped
cut polygon around the object and a trimap whose boundary ring is marked
as ignore.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .imgio import IGNORE, UNLABELED, CutPolygon, ImageBuffer, LabelMap, save_scribbles
from .strokes import Stroke, rasterize_strokes


def two_block_fixture(
    width: int = 64,
    height: int = 64,
    scribbles_per_class: int = 5,
    colors: tuple[tuple[int, int, int], tuple[int, int, int]] = ((200, 40, 40), (40, 60, 200)),
) -> tuple[ImageBuffer, LabelMap, LabelMap]:
    """Left/right color blocks with a few scribble pixels in each block.

    Returns (image, scribbles, ground truth); the ground truth is the
    block mask itself (left = class 0, right = class 1).
    """
    data = np.zeros((height, width, 3), dtype=np.uint8)
    half = width // 2
    data[:, :half] = colors[0]
    data[:, half:] = colors[1]

    scr = np.full((height, width), UNLABELED, dtype=np.int16)
    mid = height // 2
    for i in range(scribbles_per_class):
        scr[mid, half // 2 - scribbles_per_class // 2 + i] = 0
        scr[mid, half + half // 2 - scribbles_per_class // 2 + i] = 1

    gt = np.zeros((height, width), dtype=np.int16)
    gt[:, half:] = 1
    return ImageBuffer(data=data), LabelMap(labels=scr), LabelMap(labels=gt)


def _dilate(mask: np.ndarray, iterations: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(iterations):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


@dataclass
class Scene:
    image: ImageBuffer
    scribbles: LabelMap
    ground_truth: LabelMap
    polygon: CutPolygon
    object_mask: np.ndarray


def textured_scene(
    seed: int,
    width: int = 240,
    height: int = 200,
    noise: float = 18.0,
    polygon_margin: float = 12.0,
    brush_radius: float = 2.5,
    n_distractors: int = 3,
) -> Scene:
    """Irregular blob on a textured background, with annotations.

    The background carries a few distractor blobs in the object's colors,
    placed outside the cut polygon: they make purely feature-space
    similarity ambiguous while staying resolvable through the spatial
    structure. Everything derives from ``seed`` through one generator, so
    scenes are reproducible byte for byte.
    """
    rng = np.random.default_rng(seed)
    span = min(width, height)
    cx = width / 2 + rng.uniform(-0.05, 0.05) * width
    cy = height / 2 + rng.uniform(-0.05, 0.05) * height
    base_r = 0.2 * span

    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    theta = np.arctan2(ys + 0.5 - cy, xs + 0.5 - cx)
    rho = np.hypot(xs + 0.5 - cx, ys + 0.5 - cy)
    ph1, ph2 = rng.uniform(0, 2 * np.pi, size=2)
    radius = base_r * (1.0 + 0.25 * np.sin(3 * theta + ph1) + 0.12 * np.sin(5 * theta + ph2))
    obj = rho <= radius

    bg_base = np.array([90, 105, 150], dtype=np.float64) + rng.uniform(-25, 25, size=3)
    obj_base = np.array([170, 120, 60], dtype=np.float64) + rng.uniform(-25, 25, size=3)
    fx, fy = rng.uniform(1.0, 3.0, size=2)
    texture = 14.0 * np.sin(2 * np.pi * fx * xs / width) * np.cos(2 * np.pi * fy * ys / height)
    gradient = 30.0 * (ys / height - 0.5)

    img = np.empty((height, width, 3), dtype=np.float64)
    img[:] = bg_base
    img[obj] = obj_base

    # Distractors: object-colored blobs kept clear of the polygon region.
    max_obj_r = base_r * 1.37
    keep_out = max_obj_r + polygon_margin + 6.0
    dist_r = 0.07 * span
    placed = 0
    for _ in range(200):
        if placed >= n_distractors:
            break
        dx = rng.uniform(dist_r + 3, width - dist_r - 3)
        dy = rng.uniform(dist_r + 3, height - dist_r - 3)
        if np.hypot(dx - cx, dy - cy) < keep_out + dist_r:
            continue
        blob = np.hypot(xs + 0.5 - dx, ys + 0.5 - dy) <= dist_r
        img[blob] = obj_base + rng.uniform(-10, 10, size=3)
        placed += 1

    img += (texture + gradient)[:, :, None]
    img += rng.normal(0.0, noise, size=img.shape)
    image = ImageBuffer(data=np.clip(np.round(img), 0, 255).astype(np.uint8))

    # Trimap: boundary ring of the object mask is annotator disagreement.
    inner = ~_dilate(~obj, 2)
    outer = _dilate(obj, 2)
    ring = outer & ~inner
    gt = np.zeros((height, width), dtype=np.int16)
    gt[obj] = 1
    gt[ring] = IGNORE

    # Object stroke: a loop well inside the blob; background strokes along
    # the top and bottom margins (safely outside the object and distractors
    # are fair game to miss: scribbles need not cover them).
    t = np.linspace(0, 2 * np.pi, 16)
    safe_r = 0.45 * base_r
    obj_pts = [(cx + safe_r * np.cos(a), cy + 0.8 * safe_r * np.sin(a)) for a in t]
    margin = max(6.0, 0.03 * span)
    bg_top = [(width * 0.15, margin), (width * 0.85, margin)]
    bg_bottom = [(width * 0.15, height - margin), (width * 0.85, height - margin)]
    strokes = [
        Stroke(class_index=0, points=bg_top, brush_radius=brush_radius),
        Stroke(class_index=0, points=bg_bottom, brush_radius=brush_radius),
        Stroke(class_index=1, points=obj_pts, brush_radius=brush_radius),
    ]
    scribbles = rasterize_strokes(strokes, width, height)

    # Star polygon around the object: simple by construction (vertices at
    # increasing angles around the center), clipped to stay in bounds.
    angles = np.linspace(0, 2 * np.pi, 17)[:-1]
    verts = []
    for a in angles:
        r_here = base_r * (1.0 + 0.25 * np.sin(3 * a + ph1) + 0.12 * np.sin(5 * a + ph2))
        r_out = r_here + polygon_margin
        x = cx + r_out * np.cos(a)
        y = cy + r_out * np.sin(a)
        x = min(max(x, 1.0), width - 1.0)
        y = min(max(y, 1.0), height - 1.0)
        verts.append((x, y))
    polygon = CutPolygon(vertices=np.asarray(verts))
    return Scene(
        image=image,
        scribbles=scribbles,
        ground_truth=LabelMap(labels=gt),
        polygon=polygon,
        object_mask=obj,
    )


def save_ground_truth(gt: LabelMap, path: str | Path) -> None:
    """Write a trimap PNG: class 0 -> 0, class 1 -> 255, IGNORE -> 128."""
    out = np.full(gt.labels.shape, 128, dtype=np.uint8)
    out[gt.labels == 0] = 0
    out[gt.labels == 1] = 255
    Image.fromarray(out, mode="L").save(path)


def write_fixture_set(
    out_dir: str | Path,
    n_images: int = 5,
    width: int = 240,
    height: int = 200,
    seed: int = 7,
    noise: float = 18.0,
    polygon_margin: float = 12.0,
) -> Path:
    """Write a synthetic dataset with a benchmark manifest; returns its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n_images):
        scene = textured_scene(seed + i, width=width, height=height, noise=noise, polygon_margin=polygon_margin)
        img_name = f"img_{i:02d}.png"
        scr_name = f"scribbles_{i:02d}.png"
        gt_name = f"gt_{i:02d}.png"
        poly_name = f"polygon_{i:02d}.json"
        Image.fromarray(scene.image.data, mode="RGB").save(out_dir / img_name)
        save_scribbles(scene.scribbles, out_dir / scr_name)
        save_ground_truth(scene.ground_truth, out_dir / gt_name)
        with open(out_dir / poly_name, "w", encoding="utf-8") as fh:
            json.dump([[float(x), float(y)] for x, y in scene.polygon.vertices], fh)
        entries.append(
            {
                "id": f"img_{i:02d}",
                "image": img_name,
                "scribbles": scr_name,
                "polygon": poly_name,
                "ground_truth": gt_name,
            }
        )
    manifest = out_dir / "manifest.json"
    with open(manifest, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=2)
    return manifest
