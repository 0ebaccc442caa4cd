"""``landrisk`` command line: risk | eval | stream | slz | grc."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import codecs, pipeline
from .classes import map_class_to_risk
from .morphology import dilate_risk
from .sora import Environment, OperationalScenario, Visibility, grc_lookup, scenarios


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _config(args) -> pipeline.RunConfig:
    cfg = pipeline.load_run_config(args.config, args.classes, args.colormap)
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.threshold is not None:
        overrides["slz_threshold"] = args.threshold
    if args.k is not None:
        overrides["slz_k"] = args.k
    if args.budget_fps is not None:
        overrides["budget_fps"] = args.budget_fps
    return dataclasses.replace(cfg, **overrides)


def _expand(paths: list[str]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out += sorted(q for q in p.iterdir() if q.suffix.lower() in (".png", ".rlm"))
        else:
            out.append(p)
    return out


def cmd_risk(args) -> int:
    cfg = _config(args)
    inputs = _expand(args.inputs)
    result = pipeline.risk_batch(inputs, cfg, args.out or ".", args.images)
    if args.json:
        sys.stdout.write(_dump({
            "schema": pipeline.SCHEMA_VERSION,
            "written": [str(p) for p in result.written],
            "failures": [{"input": str(p), "error": e} for p, e in result.failures],
        }))
    else:
        for p in result.written:
            print(p)
    if result.failures:
        print(f"{len(result.failures)} of {len(inputs)} inputs failed:", file=sys.stderr)
        for p, e in result.failures:
            print(f"  {p}: {e}", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    try:
        report = pipeline.evaluate_dirs(args.pred_dir, args.gt_dir, cfg.table)
    except (pipeline.PipelineError, ValueError, OSError) as exc:
        print(f"eval: {exc}", file=sys.stderr)
        return 1
    text = _dump(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval.json").write_text(text)
    if args.json or not args.out:
        sys.stdout.write(text)
    return 0


def cmd_stream(args) -> int:
    cfg = _config(args)
    source = sys.stdin.buffer if args.source == "-" else args.source
    frames = codecs.iter_raw_frames(source) if args.source == "-" else pipeline.iter_frame_source(source)

    sink = None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)

        def sink(i, data):
            (out / f"frame_{i:06d}.rkm").write_bytes(data)

    try:
        stats = pipeline.run_stream(frames, cfg.table, cfg.policy, cfg.budget_fps, args.threads, sink)
    except pipeline.PipelineError as exc:
        print(f"stream: {exc}", file=sys.stderr)
        return 1
    if args.json:
        sys.stdout.write(_dump(stats.to_dict()))
    else:
        verdict = "PASS" if stats.passed else "FAIL"
        print(
            f"{stats.frames} frames, min {stats.min_fps:.1f} FPS, mean {stats.mean_fps:.1f} FPS, "
            f"budget {stats.budget_fps:g} FPS: {verdict} ({pipeline.MEASURED_QUANTITY})"
        )
    if stats.error:
        print(f"stream: {stats.error}", file=sys.stderr)
        return 1
    return 0


def cmd_slz(args) -> int:
    cfg = _config(args)
    path = Path(args.input)
    try:
        if args.risk_input or path.suffix.lower() == ".rkm":
            risk = pipeline.read_risk(path, cfg.colormap)
            dilated = False
        else:
            risk = dilate_risk(map_class_to_risk(pipeline.read_labels(path, cfg.table), cfg.table), cfg.policy)
            dilated = True
        base = codecs.read_rgb_image(args.image) if args.image else None
        doc, candidates = pipeline.slz_report(risk, cfg, dilated)
        annotated = pipeline.annotate_slz(risk, candidates, cfg.colormap, base, cfg.alpha)
    except (ValueError, OSError) as exc:
        print(f"slz: {path}: {exc}", file=sys.stderr)
        return 1
    if not candidates:
        print(f"slz: warning: no pixel at or below risk {cfg.slz_threshold}", file=sys.stderr)
    text = _dump(doc)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{path.stem}_slz.json").write_text(text)
        codecs.write_rgb_png(out / f"{path.stem}_slz.png", annotated)
    if args.json or not args.out:
        sys.stdout.write(text)
    return 0


def cmd_grc(args) -> int:
    if args.all:
        rows = [(s, grc_lookup(s)) for s in scenarios()]
    else:
        if not (args.visibility and args.environment):
            print("grc: --visibility and --environment are required (or --all)", file=sys.stderr)
            return 2
        s = OperationalScenario(Visibility(args.visibility), Environment(args.environment))
        rows = [(s, grc_lookup(s))]
    docs = [
        {
            "schema": pipeline.SCHEMA_VERSION,
            "visibility": s.visibility.value,
            "environment": s.environment.value,
            "grc": g,
            "description": s.description,
        }
        for s, g in rows
    ]
    if args.json:
        sys.stdout.write(_dump(docs if args.all else docs[0]))
    else:
        for d in docs:
            print(f"GRC {d['grc']}: {d['description']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--classes", help="class table JSON (default: packaged classes_sdd.json)")
    common.add_argument("--colormap", help="risk colormap JSON")
    common.add_argument("--config", help="run config JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--alpha", type=float, help="overlay opacity in [0, 1]")
    common.add_argument("--threshold", type=int, choices=range(6), help="highest risk level counted as safe")
    common.add_argument("--k", type=int, help="number of SLZ candidates")
    common.add_argument("--budget-fps", type=float, help="real-time budget for the stream check")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="landrisk", description="Risk maps and landing zones from semantic label maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("risk", parents=[common], help="label rasters -> dilated risk rasters and renderings")
    p.add_argument("inputs", nargs="+", help=".png/.rlm files or directories")
    p.add_argument("--images", help="directory of base images for overlays, matched by file stem")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("eval", parents=[common], help="class- and risk-level metrics for prediction vs ground truth")
    p.add_argument("pred_dir")
    p.add_argument("gt_dir")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", parents=[common], help="real-time raw frame pipeline with FPS accounting")
    p.add_argument("source", help="directory of .rlm files, a concatenated RLM1 stream file, or - for stdin")
    p.add_argument("--threads", type=int, help="worker threads (capped by LANDRISK_THREADS)")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("slz", parents=[common], help="rank safe landing zone candidates")
    p.add_argument("input", help=".rlm/.png label raster, or .rkm risk raster")
    p.add_argument("--risk-input", action="store_true", help="treat a .png input as a rendered risk map")
    p.add_argument("--image", help="base image for the annotated overlay")
    p.set_defaults(func=cmd_slz)

    p = sub.add_parser("grc", parents=[common], help="SORA intrinsic ground risk class")
    p.add_argument("--visibility", choices=[v.value for v in Visibility])
    p.add_argument("--environment", choices=[e.value for e in Environment])
    p.add_argument("--all", action="store_true", help="print the whole table")
    p.set_defaults(func=cmd_grc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
