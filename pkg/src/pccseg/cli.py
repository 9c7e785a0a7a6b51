"""Command-line interface.

Subcommands: ``segment`` (one image to a mask/overlay), ``benchmark``
(manifest evaluation to CSV/JSON), ``serve`` (run the HTTP service) and
``make-fixtures`` (write a synthetic demo dataset). Exit codes: 0 on
success, 2 for invalid flags (argparse), 3 for pipeline or I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .benchmark import (
    load_manifest,
    run_benchmark,
    write_report_csv,
    write_scatter_csv,
    write_summary_json,
)
from .engine import EngineConfig
from .features import FeatureMode
from .imgio import (
    SCRIBBLE_PALETTE,
    load_ground_truth,
    load_image,
    load_polygon,
    load_scribbles,
    save_mask,
    save_overlay,
)
from .pipeline import PipelineConfig, error_rate, segment
from .synthetic import write_fixture_set

log = logging.getLogger(__name__)


def _add_engine_flags(parser: argparse.ArgumentParser, include_seed: bool = True) -> None:
    if include_seed:
        parser.add_argument("--seed", type=int, default=0, help="run seed")
    parser.add_argument("--delta-v", type=float, default=0.1, help="domination step size")
    parser.add_argument("--p-grd", type=float, default=0.5, help="greedy-movement probability")
    parser.add_argument("--max-ite", type=int, default=1_000_000, help="iteration cap (sweeps)")
    parser.add_argument("--max-stop", type=int, default=15_000, help="stability checkpoint interval")
    parser.add_argument("--control-stop", type=float, default=0.001, help="stability threshold")


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(
        delta_v=args.delta_v,
        p_grd=args.p_grd,
        max_ite=args.max_ite,
        max_stop=args.max_stop,
        control_stop=args.control_stop,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pccseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image from scribbles")
    seg.add_argument("--image", required=True, help="input PNG/JPEG")
    seg.add_argument("--scribbles", required=True, help="RGBA scribble PNG")
    seg.add_argument("--polygon", help="optional cut polygon JSON")
    seg.add_argument("--mode", choices=["proposed", "reference"], default="proposed")
    seg.add_argument("--max-pixels", type=int, default=18_000, help="pixel budget after reduction")
    seg.add_argument("--background-class", type=int, default=0)
    _add_engine_flags(seg)
    seg.add_argument("--out-mask", required=True, help="output grayscale mask PNG")
    seg.add_argument("--out-overlay", help="optional overlay PNG")
    seg.add_argument("--gt", help="optional ground-truth trimap; prints error_rate")

    bench = sub.add_parser("benchmark", help="evaluate a dataset manifest")
    bench.add_argument("--manifest", required=True, help="dataset manifest JSON")
    bench.add_argument("--runs", type=int, required=True, help="runs per image per mode")
    bench.add_argument("--mode", choices=["proposed", "reference", "both"], default="both")
    bench.add_argument("--report", required=True, help="output CSV path")
    bench.add_argument("--seed", type=int, default=0, help="base seed (run i uses seed+i)")
    bench.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    bench.add_argument("--max-pixels", type=int, default=18_000)
    _add_engine_flags(bench, include_seed=False)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default=os.environ.get("PCCSEG_HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=int(os.environ.get("PCCSEG_PORT", "8000")))

    fixtures = sub.add_parser("make-fixtures", help="write a synthetic demo dataset")
    fixtures.add_argument("--out", required=True, help="output directory")
    fixtures.add_argument("--images", type=int, default=5)
    fixtures.add_argument("--width", type=int, default=200)
    fixtures.add_argument("--height", type=int, default=160)
    fixtures.add_argument("--seed", type=int, default=7)
    return parser


def _cmd_segment(args: argparse.Namespace) -> int:
    image = load_image(args.image)
    scribbles = load_scribbles(args.scribbles, num_classes=len(SCRIBBLE_PALETTE))
    polygon = load_polygon(args.polygon) if args.polygon else None
    cfg = PipelineConfig(
        mode=FeatureMode(args.mode),
        max_pixels=args.max_pixels,
        engine=_engine_config(args),
        background_class=args.background_class,
    )
    result = segment(image, scribbles, polygon, cfg)
    save_mask(result.full_res_labels, args.out_mask)
    gt = load_ground_truth(args.gt) if args.gt else None
    if args.out_overlay:
        save_overlay(image, result.full_res_labels, args.out_overlay, ground_truth=gt)
    if gt is not None:
        print(f"error_rate={error_rate(result.full_res_labels, gt)!r}")
    log.info(
        "segmented %s: %d nodes, %d edges, %d iterations (%s)",
        args.image,
        result.network_nodes,
        result.network_edges,
        result.stats.iterations_executed,
        result.stats.stop_reason.value,
    )
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    entries = load_manifest(args.manifest)
    modes = {
        "proposed": [FeatureMode.PROPOSED],
        "reference": [FeatureMode.REFERENCE],
        "both": [FeatureMode.PROPOSED, FeatureMode.REFERENCE],
    }[args.mode]
    cfg = PipelineConfig(max_pixels=args.max_pixels, engine=_engine_config(args))
    report = run_benchmark(entries, args.runs, modes, cfg, base_seed=args.seed, jobs=args.jobs)
    report_path = Path(args.report)
    write_report_csv(report, report_path)
    write_summary_json(report, report_path.with_suffix(".summary.json"))
    write_scatter_csv(report, report_path.with_suffix(".scatter.csv"))
    for mode, stats in report.mode_means().items():
        print(f"{mode}: mean_error={stats['mean_error']:.4%} mean_seconds={stats['mean_seconds']:.2f} runs={stats['runs']}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _cmd_make_fixtures(args: argparse.Namespace) -> int:
    manifest = write_fixture_set(
        args.out, n_images=args.images, width=args.width, height=args.height, seed=args.seed
    )
    print(f"manifest={manifest}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("PCCSEG_LOGLEVEL", "INFO"))
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "segment": _cmd_segment,
        "benchmark": _cmd_benchmark,
        "serve": _cmd_serve,
        "make-fixtures": _cmd_make_fixtures,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
