"""Frame pipeline, run configuration and batch commands.

The streaming path is raw label frame -> risk mapping -> dilation -> raw risk
frame. It measures only this post-inference work; segmentation happens
upstream and is not timed here.
"""
from __future__ import annotations

import json
import logging
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np
from PIL import Image, ImageDraw

from . import codecs
from .classes import ClassTable, load_class_table, map_class_to_risk
from .codecs import RiskColormap, load_colormap
from .metrics import MetricsReport, coarsen, confusion, row_normalize
from .morphology import DilationPolicy, SlzCandidate, dilate_risk, select_slz

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STAGES = ("decode", "map", "dilate", "encode")
MEASURED_QUANTITY = (
    "post-inference pipeline only (raw decode -> class-to-risk map -> dilation -> raw encode); "
    "segmentation inference time is not included"
)


class PipelineError(RuntimeError):
    pass


@dataclass
class RunConfig:
    table: ClassTable
    colormap: RiskColormap
    policy: DilationPolicy = field(default_factory=DilationPolicy)
    slz_threshold: int = 1
    slz_k: int = 5
    alpha: float = 0.5
    budget_fps: float = 14.0

    def __post_init__(self):
        if not 0 <= self.slz_threshold <= 5:
            raise ValueError(f"threshold must be in [0, 5], got {self.slz_threshold}")
        if self.slz_k < 1:
            raise ValueError(f"k must be >= 1, got {self.slz_k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.budget_fps <= 0:
            raise ValueError(f"budget_fps must be positive, got {self.budget_fps}")


def load_run_config(
    path: str | Path | None = None,
    classes: str | Path | None = None,
    colormap: str | Path | None = None,
) -> RunConfig:
    """Build a :class:`RunConfig` from a JSON config file.

    Paths inside the file resolve relative to it. ``classes`` and
    ``colormap`` override the file's entries. With no file, the packaged
    defaults are used.
    """
    if path is None:
        doc = json.loads(resources.files("landrisk.data").joinpath("default_config.json").read_text())
        base = None
    else:
        path = Path(path)
        doc = json.loads(path.read_text())
        base = path.parent

    def resolve(override, key):
        if override is not None:
            return Path(override)
        if base is None or key not in doc:
            return None
        return base / doc[key]

    table = load_class_table(resolve(classes, "classes"))
    cmap = load_colormap(resolve(colormap, "colormap"))
    slz = doc.get("slz", {})
    radii = doc.get("dilation", {}).get("radius_per_level")
    return RunConfig(
        table=table,
        colormap=cmap,
        policy=DilationPolicy(tuple(radii)) if radii is not None else DilationPolicy(),
        slz_threshold=int(slz.get("threshold", 1)),
        slz_k=int(slz.get("k", 5)),
        alpha=float(doc.get("alpha", 0.5)),
        budget_fps=float(doc.get("budget_fps", 14.0)),
    )


def resolve_workers(requested: int | None = None) -> int:
    """Worker count, capped by the ``LANDRISK_THREADS`` environment variable."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("LANDRISK_THREADS")
    if cap:
        n = min(n, int(cap))
    return max(1, n)


# -- stats --------------------------------------------------------------------

@dataclass
class PipelineStats:
    budget_fps: float
    frames: int = 0
    per_stage_nanos: dict[str, int] = field(default_factory=lambda: dict.fromkeys(STAGES, 0))
    frame_nanos: list[int] = field(default_factory=list)
    wall_nanos: int = 0
    workers: int = 1
    error: str | None = None

    def add(self, timings: dict[str, int]) -> None:
        self.frames += 1
        for stage, ns in timings.items():
            self.per_stage_nanos[stage] = self.per_stage_nanos.get(stage, 0) + ns
        self.frame_nanos.append(sum(timings.values()))

    @property
    def min_fps(self) -> float:
        if not self.frame_nanos:
            return 0.0
        return 1e9 / max(max(self.frame_nanos), 1)

    @property
    def mean_fps(self) -> float:
        if not self.frame_nanos:
            return 0.0
        return 1e9 * len(self.frame_nanos) / max(sum(self.frame_nanos), 1)

    @property
    def wall_fps(self) -> float:
        return 1e9 * self.frames / self.wall_nanos if self.wall_nanos else 0.0

    @property
    def passed(self) -> bool:
        return self.frames > 0 and self.error is None and self.min_fps >= self.budget_fps

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "measured": MEASURED_QUANTITY,
            "frames": self.frames,
            "per_stage_nanos": dict(self.per_stage_nanos),
            "wall_nanos": self.wall_nanos,
            "min_fps": self.min_fps,
            "mean_fps": self.mean_fps,
            "wall_fps": self.wall_fps,
            "budget_fps": self.budget_fps,
            "pass": self.passed,
            "workers": self.workers,
            "error": self.error,
        }


# -- streaming ----------------------------------------------------------------

def process_frame(raw: bytes, table: ClassTable, policy: DilationPolicy) -> tuple[bytes, dict[str, int]]:
    """One raw label frame to one raw risk frame, with per-stage nanoseconds."""
    t0 = time.perf_counter_ns()
    labels = codecs.decode_labels_raw(raw, table)
    t1 = time.perf_counter_ns()
    risk = map_class_to_risk(labels, table)
    t2 = time.perf_counter_ns()
    risk = dilate_risk(risk, policy)
    t3 = time.perf_counter_ns()
    out = codecs.encode_risk_raw(risk)
    t4 = time.perf_counter_ns()
    return out, {"decode": t1 - t0, "map": t2 - t1, "dilate": t3 - t2, "encode": t4 - t3}


def run_stream(
    frames: Iterable[bytes],
    table: ClassTable,
    policy: DilationPolicy,
    budget_fps: float = 14.0,
    workers: int | None = None,
    sink: Callable[[int, bytes], None] | None = None,
) -> PipelineStats:
    """Process raw label frames in order, handing each risk frame to ``sink``.

    Frames may be processed concurrently but ``sink`` always sees them in
    input order. A malformed frame stops the run; the returned stats cover the
    frames completed before it and carry the error message. An empty source
    raises :class:`PipelineError`.
    """
    n_workers = resolve_workers(workers)
    stats = PipelineStats(budget_fps=budget_fps, workers=n_workers)
    start = time.perf_counter_ns()

    def emit(i, result):
        out, timings = result
        stats.add(timings)
        if sink is not None:
            sink(i, out)

    source_error: list[Exception] = []

    def guarded():
        # a broken source ends the run after the frames already read
        try:
            yield from frames
        except (ValueError, OSError) as exc:
            source_error.append(exc)

    try:
        if n_workers == 1:
            for i, raw in enumerate(guarded()):
                emit(i, process_frame(raw, table, policy))
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                pending: deque = deque()
                try:
                    for i, raw in enumerate(guarded()):
                        pending.append((i, pool.submit(process_frame, raw, table, policy)))
                        if len(pending) >= 2 * n_workers:
                            j, fut = pending.popleft()
                            emit(j, fut.result())
                    while pending:
                        j, fut = pending.popleft()
                        emit(j, fut.result())
                finally:
                    for _, fut in pending:
                        fut.cancel()
    except (ValueError, OSError) as exc:
        stats.error = f"frame {stats.frames}: {exc}"
    if stats.error is None and source_error:
        stats.error = f"frame {stats.frames}: {source_error[0]}"
    if stats.error is not None:
        log.error("stream aborted at %s", stats.error)
    stats.wall_nanos = time.perf_counter_ns() - start

    if stats.frames == 0 and stats.error is None:
        raise PipelineError("no frames")
    return stats


def iter_frame_source(source: str | Path) -> Iterator[bytes]:
    """Raw frames from a directory of ``.rlm`` files (sorted by name) or a concatenated stream file."""
    source = Path(source)
    if source.is_dir():
        for p in sorted(source.glob("*.rlm")):
            yield p.read_bytes()
    else:
        with open(source, "rb") as fh:
            yield from codecs.iter_raw_frames(fh)


# -- batch commands -----------------------------------------------------------

def read_labels(path: str | Path, table: ClassTable) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".rlm":
        return codecs.decode_labels_raw(data, table)
    return codecs.decode_label_image(data, table)


def read_risk(path: str | Path, cmap: RiskColormap) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".rkm":
        return codecs.decode_risk_raw(data)
    return codecs.decode_risk_image(data, cmap)


@dataclass
class BatchResult:
    written: list[Path] = field(default_factory=list)
    failures: list[tuple[Path, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def risk_batch(
    inputs: Iterable[str | Path],
    cfg: RunConfig,
    out_dir: str | Path,
    image_dir: str | Path | None = None,
) -> BatchResult:
    """Map and dilate each label raster; write ``<stem>.rkm`` and ``<stem>.png``.

    With ``image_dir``, a base image ``<stem>.*`` found there also produces
    ``<stem>_overlay.png``. Failing inputs are recorded and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = BatchResult()
    for path in map(Path, inputs):
        try:
            labels = read_labels(path, cfg.table)
            risk = dilate_risk(map_class_to_risk(labels, cfg.table), cfg.policy)
            rkm = out_dir / f"{path.stem}.rkm"
            png = out_dir / f"{path.stem}.png"
            rkm.write_bytes(codecs.encode_risk_raw(risk))
            png.write_bytes(codecs.encode_risk_image(risk, cfg.colormap))
            result.written += [rkm, png]
            if image_dir is not None:
                bases = sorted(Path(image_dir).glob(f"{path.stem}.*"))
                if bases:
                    base = codecs.read_rgb_image(bases[0])
                    ov = out_dir / f"{path.stem}_overlay.png"
                    codecs.write_rgb_png(ov, codecs.overlay(base, risk, cfg.colormap, cfg.alpha))
                    result.written.append(ov)
        except (ValueError, OSError) as exc:
            log.warning("%s: %s", path, exc)
            result.failures.append((path, str(exc)))
    return result


def _raster_files(directory: Path) -> dict[str, Path]:
    files = {}
    for p in sorted(directory.iterdir()):
        if p.suffix.lower() in (".png", ".rlm"):
            if p.stem in files:
                raise PipelineError(f"ambiguous inputs for {p.stem!r} in {directory}")
            files[p.stem] = p
    return files


def evaluate_dirs(pred_dir: str | Path, gt_dir: str | Path, table: ClassTable) -> dict:
    """Aggregate class- and risk-level metrics over prediction/ground-truth pairs matched by name."""
    preds = _raster_files(Path(pred_dir))
    gts = _raster_files(Path(gt_dir))
    unmatched = sorted(set(preds) ^ set(gts))
    if unmatched:
        raise PipelineError(f"unmatched filenames: {', '.join(unmatched)}")
    if not preds:
        raise PipelineError("no label rasters to evaluate")

    n = len(table)
    cm = None
    for stem in sorted(preds):
        pred = read_labels(preds[stem], table)
        gt = read_labels(gts[stem], table)
        if pred.shape != gt.shape:
            raise PipelineError(f"{stem}: dimension mismatch {pred.shape} vs {gt.shape}")
        part = confusion(pred, gt, n)
        cm = part if cm is None else cm + part
    risk_cm = coarsen(cm, table.risk_lut, n_groups=6)
    return {
        "schema": SCHEMA_VERSION,
        "pairs": len(preds),
        "class_level": MetricsReport.from_confusion(cm).to_dict(),
        "risk_level": MetricsReport.from_confusion(risk_cm).to_dict(),
        "row_normalized": {
            "class_level": row_normalize(cm).tolist(),
            "risk_level": row_normalize(risk_cm).tolist(),
        },
        "metadata": {
            "pixel_accuracy": "micro pixel accuracy: trace / total",
            "balanced_accuracy": "mean recall over classes present in the ground truth",
            "undefined": "null where a per-class denominator is zero; excluded from means",
        },
    }


def slz_report(risk: np.ndarray, cfg: RunConfig, dilated: bool) -> tuple[dict, list[SlzCandidate]]:
    candidates = select_slz(risk, cfg.slz_threshold, cfg.slz_k)
    doc = {
        "schema": SCHEMA_VERSION,
        "threshold": cfg.slz_threshold,
        "k": cfg.slz_k,
        "policy": {"radius_per_level": list(cfg.policy.radius_per_level), "applied": dilated},
        "candidates": [c.to_dict() for c in candidates],
    }
    return doc, candidates


def annotate_slz(
    risk: np.ndarray,
    candidates: list[SlzCandidate],
    cmap: RiskColormap,
    base: np.ndarray | None = None,
    alpha: float = 0.5,
) -> np.ndarray:
    """Risk overlay with a clearance circle and center mark for each candidate."""
    if base is None:
        rgb = codecs.render_risk(risk, cmap)
    else:
        rgb = codecs.overlay(base, risk, cmap, alpha)
    img = Image.fromarray(rgb)
    draw = ImageDraw.Draw(img)
    for c in candidates:
        cx, cy = c.center[0] + 0.5, c.center[1] + 0.5
        r = c.clearance_radius
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=(255, 255, 255))
        draw.line([cx - 2, cy, cx + 2, cy], fill=(255, 255, 255))
        draw.line([cx, cy - 2, cx, cy + 2], fill=(255, 255, 255))
    return np.asarray(img)
