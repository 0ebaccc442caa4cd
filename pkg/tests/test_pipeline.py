import io
import json

import numpy as np
import pytest

import landrisk as lr
from landrisk import pipeline
from landrisk.cli import main
from landrisk.morphology import DilationPolicy


def _write_labels(path, labels, table):
    if path.suffix == ".rlm":
        path.write_bytes(lr.encode_labels_raw(labels, table))
    else:
        path.write_bytes(lr.encode_label_image(labels, table))


def test_default_config():
    cfg = pipeline.load_run_config()
    assert len(cfg.table) == 24
    assert cfg.policy.radius_per_level == (0, 0, 0, 5, 5, 15)
    assert cfg.budget_fps == 14.0 and cfg.slz_threshold == 1


def test_config_file_relative_paths(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps([
        {"id": 0, "label": "ok", "color": [0, 0, 0], "risk": 0},
        {"id": 1, "label": "bad", "color": [9, 9, 9], "risk": 5},
    ]))
    (tmp_path / "run.json").write_text(json.dumps({"classes": "c.json", "dilation": {"radius_per_level": [0] * 6}, "alpha": 0.25}))
    cfg = pipeline.load_run_config(tmp_path / "run.json")
    assert len(cfg.table) == 2 and cfg.alpha == 0.25 and cfg.policy == DilationPolicy.identity()


def test_workers_env_cap(monkeypatch):
    monkeypatch.setenv("LANDRISK_THREADS", "2")
    assert pipeline.resolve_workers(8) == 2
    monkeypatch.delenv("LANDRISK_THREADS")
    assert pipeline.resolve_workers(3) == 3


def test_stream_order_and_stats(rng, table):
    frames = [lr.encode_labels_raw(rng.integers(0, 24, (6, 9)).astype(np.uint8), table) for _ in range(12)]
    outputs = {}
    stats = pipeline.run_stream(frames, table, DilationPolicy.uniform(1), workers=4, sink=outputs.__setitem__)
    assert stats.frames == 12 and list(outputs) == list(range(12))
    for i, raw in enumerate(frames):
        labels = lr.decode_labels_raw(raw, table)
        expect = lr.dilate_risk(lr.map_class_to_risk(labels, table), DilationPolicy.uniform(1))
        assert outputs[i] == lr.encode_risk_raw(expect)
    assert stats.min_fps <= stats.mean_fps
    d = stats.to_dict()
    assert d["schema"] == 1 and set(d["per_stage_nanos"]) == {"decode", "map", "dilate", "encode"}


def test_stream_stage_time_conserved(rng, table):
    frames = [lr.encode_labels_raw(rng.integers(0, 24, (30, 40)).astype(np.uint8), table)] * 5
    stats = pipeline.run_stream(frames, table, DilationPolicy(), workers=1)
    assert sum(stats.per_stage_nanos.values()) <= stats.wall_nanos


def test_stream_empty(table):
    with pytest.raises(pipeline.PipelineError, match="no frames"):
        pipeline.run_stream([], table, DilationPolicy())


@pytest.mark.parametrize("workers", [1, 3])
def test_stream_malformed_aborts(table, workers):
    good = lr.encode_labels_raw(np.zeros((2, 2), np.uint8), table)
    bad = good[:-1]
    stats = pipeline.run_stream([good, good, bad, good], table, DilationPolicy(), workers=workers)
    assert stats.frames == 2 and "truncated" in stats.error and not stats.passed


def test_stream_truncated_source_keeps_completed(table):
    good = lr.encode_labels_raw(np.zeros((2, 2), np.uint8), table)
    src = io.BytesIO(good * 3 + good[:7])
    stats = pipeline.run_stream(lr.codecs.iter_raw_frames(src), table, DilationPolicy(), workers=2)
    assert stats.frames == 3 and "truncated" in stats.error


# -- CLI ----------------------------------------------------------------------

def test_cli_risk(tmp_path, table, capsys):
    labels = np.array([[2, 5, 23], [21, 12, 0]], np.uint8)
    _write_labels(tmp_path / "a.png", labels, table)
    out = tmp_path / "out"
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"dilation": {"radius_per_level": [0] * 6}}))
    assert main(["risk", str(tmp_path / "a.png"), "--out", str(out), "--config", str(cfg)]) == 0
    risk = lr.decode_risk_raw((out / "a.rkm").read_bytes())
    assert np.array_equal(risk, lr.map_class_to_risk(labels, table))
    assert np.array_equal(lr.decode_risk_image((out / "a.png").read_bytes(), lr.default_colormap()), risk)


def test_cli_risk_overlay_and_failures(tmp_path, table, capsys):
    inp = tmp_path / "in"
    inp.mkdir()
    _write_labels(inp / "good.rlm", np.zeros((4, 4), np.uint8), table)
    rgb = np.zeros((4, 4, 3), np.uint8)
    rgb[0, 0] = (1, 2, 3)
    from PIL import Image
    Image.fromarray(rgb).save(inp / "bad.png")
    images = tmp_path / "img"
    images.mkdir()
    Image.fromarray(np.full((4, 4, 3), 200, np.uint8)).save(images / "good.png")
    out = tmp_path / "out"
    assert main(["risk", str(inp), "--out", str(out), "--images", str(images), "--alpha", "1"]) == 1
    err = capsys.readouterr().err
    assert "1 of 2 inputs failed" in err and "bad.png" in err and "unknown color" in err
    assert (out / "good.rkm").exists() and (out / "good.png").exists()
    assert (out / "good_overlay.png").read_bytes() == (out / "good.png").read_bytes()


def test_cli_eval_identical_dirs(tmp_path, rng, table, capsys):
    d = tmp_path / "gt"
    d.mkdir()
    for i in range(3):
        _write_labels(d / f"f{i}.png", rng.integers(0, 24, (8, 8)).astype(np.uint8), table)
    assert main(["eval", str(d), str(d), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["schema"] == 1 and report["pairs"] == 3
    for level in ("class_level", "risk_level"):
        r = report[level]
        assert r["mean_iou"] == r["mean_f1"] == r["pixel_accuracy"] == r["balanced_accuracy"] == 1.0
    assert report["risk_level"]["n_classes"] == 6


def test_cli_eval_synthetic_pair(tmp_path, table, capsys):
    pred, gt = tmp_path / "pred", tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    _write_labels(pred / "x.rlm", np.array([[0, 1], [1, 1]], np.uint8), table)
    _write_labels(gt / "x.rlm", np.array([[0, 1], [0, 1]], np.uint8), table)
    assert main(["eval", str(pred), str(gt), "--out", str(tmp_path / "rep")]) == 0
    report = json.loads((tmp_path / "rep" / "eval.json").read_text())
    assert report["class_level"]["mean_iou"] == pytest.approx(7 / 12, abs=1e-12)
    assert report["risk_level"]["pixel_accuracy"] >= report["class_level"]["pixel_accuracy"]
    assert report["row_normalized"]["class_level"][0][:2] == [0.5, 0.5]


def test_cli_eval_unmatched(tmp_path, table, capsys):
    pred, gt = tmp_path / "pred", tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    _write_labels(pred / "x.rlm", np.zeros((2, 2), np.uint8), table)
    _write_labels(gt / "y.rlm", np.zeros((2, 2), np.uint8), table)
    assert main(["eval", str(pred), str(gt)]) == 1
    assert "unmatched" in capsys.readouterr().err


def test_cli_stream(tmp_path, rng, table, capsys):
    src = tmp_path / "frames.bin"
    frames = [lr.encode_labels_raw(rng.integers(0, 24, (10, 12)).astype(np.uint8), table) for _ in range(5)]
    src.write_bytes(b"".join(frames))
    out = tmp_path / "out"
    assert main(["stream", str(src), "--out", str(out), "--json", "--budget-fps", "14"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["frames"] == 5 and stats["budget_fps"] == 14 and "inference" in stats["measured"]
    assert sorted(p.name for p in out.iterdir()) == [f"frame_{i:06d}.rkm" for i in range(5)]


def test_cli_stream_empty(tmp_path, capsys):
    (tmp_path / "empty.bin").write_bytes(b"")
    assert main(["stream", str(tmp_path / "empty.bin")]) == 1
    assert "no frames" in capsys.readouterr().err


def test_cli_slz(tmp_path, table, capsys):
    _write_labels(tmp_path / "safe.rlm", np.zeros((9, 9), np.uint8), table)
    args = ["slz", str(tmp_path / "safe.rlm"), "--out", str(tmp_path / "o"), "--json"]
    assert main(args) == 0
    first = capsys.readouterr().out
    doc = json.loads(first)
    assert doc["schema"] == 1 and len(doc["candidates"]) == 1
    assert doc["candidates"][0]["center"] == [4, 4] and doc["candidates"][0]["clearance_px"] == 4.5
    png = (tmp_path / "o" / "safe_slz.png").read_bytes()
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert (tmp_path / "o" / "safe_slz.png").read_bytes() == png


def test_cli_slz_all_risky(tmp_path, capsys):
    (tmp_path / "r.rkm").write_bytes(lr.encode_risk_raw(np.full((5, 5), 5, np.uint8)))
    assert main(["slz", str(tmp_path / "r.rkm"), "--json"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["candidates"] == []
    assert "warning" in captured.err


def test_cli_grc(capsys):
    assert main(["grc", "--visibility", "VLOS", "--environment", "populated", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {
        "schema": 1,
        "visibility": "VLOS",
        "environment": "populated",
        "grc": 4,
        "description": "VLOS in populated environment",
    }
    assert main(["grc", "--visibility", "BVLOS", "--environment", "gathering_of_people"]) == 0
    assert capsys.readouterr().out.strip() == "GRC 8: BVLOS over gathering of people"
