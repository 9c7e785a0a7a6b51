"""Batch evaluation against ground truth.

A dataset manifest is a JSON list of records with an id, image path,
scribble path, optional polygon path and ground-truth path (relative
paths resolve against the manifest's directory). Every image is run
``runs`` times per mode with seeds base_seed, base_seed+1, ... and the
per-run rows are aggregated into per-mode and per-image means.

Following the evaluation protocol, the cut polygon is applied only in
proposed mode; the reference model always processes the entire image.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .engine import EngineConfig
from .features import FeatureMode
from .imgio import load_ground_truth, load_image, load_polygon, load_scribbles, SCRIBBLE_PALETTE
from .pipeline import PipelineConfig, error_rate, segment

log = logging.getLogger(__name__)

CSV_HEADER = ["image", "mode", "run", "error", "seconds", "nodes", "edges", "iterations"]


@dataclass
class ManifestEntry:
    id: str
    image: Path
    scribbles: Path
    ground_truth: Path
    polygon: Path | None = None


@dataclass
class BenchRow:
    image: str
    mode: str
    run: int
    error: float
    seconds: float
    nodes: int
    edges: int
    iterations: int


@dataclass
class EvalReport:
    rows: list[BenchRow]

    def mode_means(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for mode in sorted({r.mode for r in self.rows}):
            sel = [r for r in self.rows if r.mode == mode]
            out[mode] = {
                "mean_error": sum(r.error for r in sel) / len(sel),
                "mean_seconds": sum(r.seconds for r in sel) / len(sel),
                "runs": len(sel),
            }
        return out

    def image_means(self) -> list[tuple[str, str, float, float]]:
        keys = sorted({(r.image, r.mode) for r in self.rows})
        out = []
        for image, mode in keys:
            sel = [r for r in self.rows if r.image == image and r.mode == mode]
            out.append(
                (
                    image,
                    mode,
                    sum(r.error for r in sel) / len(sel),
                    sum(r.seconds for r in sel) / len(sel),
                )
            )
        return out


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError(f"manifest must be a JSON list: {path}")
    base = path.parent
    entries = []
    for i, rec in enumerate(raw):
        try:
            entries.append(
                ManifestEntry(
                    id=str(rec["id"]),
                    image=base / rec["image"],
                    scribbles=base / rec["scribbles"],
                    ground_truth=base / rec["ground_truth"],
                    polygon=(base / rec["polygon"]) if rec.get("polygon") else None,
                )
            )
        except KeyError as exc:
            raise ValueError(f"manifest record {i} is missing field {exc}") from exc
    return entries


def _check_entry(entry: ManifestEntry) -> bool:
    missing = [p for p in (entry.image, entry.scribbles, entry.ground_truth) if not p.exists()]
    if entry.polygon is not None and not entry.polygon.exists():
        missing.append(entry.polygon)
    if missing:
        log.warning("skipping %s: missing %s", entry.id, ", ".join(str(m) for m in missing))
        return False
    return True


def _run_cell(args: tuple) -> BenchRow:
    entry_id, image_path, scr_path, poly_path, gt_path, mode, run_idx, seed, cfg_fields = args
    image = load_image(image_path)
    scribbles = load_scribbles(scr_path, num_classes=len(SCRIBBLE_PALETTE))
    gt = load_ground_truth(gt_path)
    polygon = load_polygon(poly_path) if (poly_path and mode == FeatureMode.PROPOSED.value) else None
    engine_cfg = dataclasses.replace(EngineConfig(**cfg_fields["engine"]), seed=seed)
    cfg = PipelineConfig(
        mode=FeatureMode(mode),
        max_pixels=cfg_fields["max_pixels"],
        engine=engine_cfg,
        background_class=cfg_fields["background_class"],
    )
    result = segment(image, scribbles, polygon, cfg)
    err = error_rate(result.full_res_labels, gt)
    return BenchRow(
        image=entry_id,
        mode=mode,
        run=run_idx,
        error=err,
        seconds=result.stats.wall_seconds,
        nodes=result.network_nodes,
        edges=result.network_edges,
        iterations=result.stats.iterations_executed,
    )


def run_benchmark(
    entries: list[ManifestEntry],
    runs: int,
    modes: list[FeatureMode],
    cfg: PipelineConfig | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> EvalReport:
    """Execute runs x images x modes cells; rows come back sorted."""
    cfg = cfg or PipelineConfig()
    if runs < 1:
        raise ValueError("runs must be >= 1")
    usable = [e for e in entries if _check_entry(e)]
    if not usable:
        log.warning("benchmark manifest produced no runnable entries")
        return EvalReport(rows=[])
    cfg_fields = {
        "max_pixels": cfg.max_pixels,
        "background_class": cfg.background_class,
        "engine": {
            "delta_v": cfg.engine.delta_v,
            "p_grd": cfg.engine.p_grd,
            "max_ite": cfg.engine.max_ite,
            "max_stop": cfg.engine.max_stop,
            "control_stop": cfg.engine.control_stop,
        },
    }
    cells = []
    for entry in usable:
        for mode in modes:
            for run_idx in range(runs):
                cells.append(
                    (
                        entry.id,
                        str(entry.image),
                        str(entry.scribbles),
                        str(entry.polygon) if entry.polygon else None,
                        str(entry.ground_truth),
                        mode.value,
                        run_idx,
                        base_seed + run_idx,
                        cfg_fields,
                    )
                )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r.image, r.mode, r.run))
    return EvalReport(rows=rows)


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in report.rows:
            writer.writerow([r.image, r.mode, r.run, repr(r.error), repr(r.seconds), r.nodes, r.edges, r.iterations])


def write_scatter_csv(report: EvalReport, path: str | Path) -> None:
    """Per-image mean error vs mean seconds (scatter-plot input)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "mode", "mean_error", "mean_seconds"])
        for image, mode, mean_err, mean_sec in report.image_means():
            writer.writerow([image, mode, repr(mean_err), repr(mean_sec)])


def write_summary_json(report: EvalReport, path: str | Path) -> None:
    summary = {
        "modes": report.mode_means(),
        "images": [
            {"image": image, "mode": mode, "mean_error": mean_err, "mean_seconds": mean_sec}
            for image, mode, mean_err, mean_sec in report.image_means()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
