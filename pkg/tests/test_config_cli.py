"""Configuration file round-trips and the command-line front end."""

import dataclasses
import filecmp
import json
import os

import numpy as np
import pytest

from lanegraph.cli import main
from lanegraph.config import RunConfig, read_run_config, write_run_config
from lanegraph.errors import ConfigError
from lanegraph.extraction import ExtractionConfig, detect
from lanegraph.features import FusionWeights
from lanegraph.geometry import IpmGrid
from lanegraph.io import read_image, read_json


# ----------------------------------------------------------- RunConfig core


def test_default_factories_match_domain_defaults():
    cfg = RunConfig()
    assert cfg.ipm_grid() == IpmGrid()
    assert cfg.fusion_weights() == FusionWeights()
    ex = cfg.extraction_config()
    assert ex == ExtractionConfig()
    cam = cfg.camera()
    assert cam.image_width == 1280 and cam.image_height == 960
    assert cam.fu == 1400.0 and cam.height_m == 1.5


def test_round_trip_defaults(tmp_path):
    p = tmp_path / "run.ini"
    write_run_config(RunConfig(), p)
    assert read_run_config(p) == RunConfig()


def test_round_trip_custom_values(tmp_path):
    cfg = dataclasses.replace(
        RunConfig(),
        fx=1111.25,
        pitch=0.1 + 0.2,  # 0.30000000000000004 — repr must survive
        yaw=-1e-7,
        x_min=-5.5,
        out_width=200,
        sigma=1.7,
        low_threshold=12.5,
        high_threshold=80.0,
        movement_penalty=0.5,
        stop_cost=123.456,
        max_lanes=2,
        min_inlier_ratio=1 / 3,
        seed=99,
        debug_dumps=True,
        bench_sizes=(8, 24, 48),
        bench_repetitions=1,
        bench_all_pairs_max_nodes=64,
    )
    p = tmp_path / "run.ini"
    write_run_config(cfg, p)
    assert read_run_config(p) == cfg


def test_round_trip_stop_cost_auto(tmp_path):
    p = tmp_path / "run.ini"
    write_run_config(RunConfig(), p)
    assert "stop_cost = auto" in p.read_text()
    assert read_run_config(p).stop_cost is None


def test_empty_file_is_all_defaults(tmp_path):
    p = tmp_path / "empty.ini"
    p.write_text("")
    assert read_run_config(p) == RunConfig()


def test_partial_file_keeps_other_defaults(tmp_path):
    p = tmp_path / "partial.ini"
    p.write_text("[extraction]\nmax_lanes = 2\n\n[run]\nseed = 7\n")
    cfg = read_run_config(p)
    assert cfg.max_lanes == 2 and cfg.seed == 7
    assert cfg == dataclasses.replace(RunConfig(), max_lanes=2, seed=7)


def test_stop_cost_spellings(tmp_path):
    for text, expected in (("auto", None), ("none", None), ("350.5", 350.5)):
        p = tmp_path / "s.ini"
        p.write_text(f"[extraction]\nstop_cost = {text}\n")
        assert read_run_config(p).stop_cost == expected


def test_missing_file_names_the_path(tmp_path):
    missing = tmp_path / "nope.ini"
    with pytest.raises(ConfigError) as err:
        read_run_config(missing)
    assert str(missing) in str(err.value)


def test_unparseable_ini_reports_file(tmp_path):
    p = tmp_path / "broken.ini"
    p.write_text("this is not ini at all\n")
    with pytest.raises(ConfigError):
        read_run_config(p)


def test_all_violations_reported_together(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text(
        "[features]\n"
        "edge_weight = 0.7\n"
        "gray_weight = 0.7\n"  # weights no longer sum to 1
        "sigma = -1\n"  # must be positive
        "[extraction]\n"
        "branch_radius = -2\n"  # must be a positive integer
        "[run]\n"
        "seed = abc\n"  # unparseable int
        "velocity = 3\n"  # unknown key
        "[junk]\n"
        "a = 1\n"  # unknown section
        "[bench]\n"
        "sizes = 1, 4\n"  # sizes must be >= 2
    )
    with pytest.raises(ConfigError) as err:
        read_run_config(p)
    text = str(err.value)
    for fragment in (
        "sum to 1",
        "sigma must be positive",
        "branch radius",
        "cannot parse 'abc'",
        "unknown key 'velocity'",
        "unknown section [junk]",
        "sizes must all be >= 2",
    ):
        assert fragment in text, f"missing violation: {fragment}\n{text}"
    assert len(err.value.violations) >= 7


def test_threshold_order_enforced(tmp_path):
    p = tmp_path / "t.ini"
    p.write_text("[features]\nlow_threshold = 90\nhigh_threshold = 60\n")
    with pytest.raises(ConfigError, match="low < high"):
        read_run_config(p)


# ------------------------------------------------------------- CLI fixtures


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    """Two rendered lane scenes plus ground truth, seeds 0 and 1."""
    d = tmp_path_factory.mktemp("scenes")
    assert main(["synth", "--out", str(d), "--seed", "0", "--count", "2"]) == 0
    return d


@pytest.fixture(scope="module")
def scene_png(scene_dir):
    return str(scene_dir / "scene_00000.png")


# ------------------------------------------------------------------- synth


def test_synth_outputs(scene_dir):
    for seed in (0, 1):
        png = scene_dir / f"scene_{seed:05d}.png"
        gt = scene_dir / f"scene_{seed:05d}_gt.json"
        assert png.is_file() and gt.is_file()
        truth = read_json(gt)
        assert truth["seed"] == seed
        assert len(truth["lanes"]) == 2
        for lane in truth["lanes"]:
            assert len(lane["ground"]) == 3 and len(lane["ipm"]) == 3
    img = read_image(scene_dir / "scene_00000.png")
    assert img.shape == (960, 1280) and img.dtype == np.uint8


def test_synth_deterministic(scene_dir, tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--seed", "0", "--count", "1"]) == 0
    assert filecmp.cmp(
        scene_dir / "scene_00000.png", tmp_path / "scene_00000.png", shallow=False
    )
    assert (scene_dir / "scene_00000_gt.json").read_bytes() == (
        tmp_path / "scene_00000_gt.json"
    ).read_bytes()


def test_synth_explicit_lanes(tmp_path, capsys):
    rc = main(
        ["synth", "--out", str(tmp_path), "--lanes", "0.001,0.0,-1.75; 0.001,0.0,1.75",
         "--noise-sigma", "1.0"]
    )
    assert rc == 0
    truth = read_json(tmp_path / "scene_00000_gt.json")
    assert truth["lanes"][0]["ground"] == [0.001, 0.0, -1.75]
    assert truth["stressors"]["noise_sigma"] == 1.0


def test_synth_high_curvature_flagged(tmp_path, capsys):
    rc = main(["synth", "--out", str(tmp_path), "--kind", "high_curvature", "--seed", "3"])
    assert rc == 0
    assert "expected failure" in capsys.readouterr().out
    assert read_json(tmp_path / "scene_00003_gt.json")["expected_failure"] is True


def test_synth_bad_lane_spec(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "--lanes", "1,2"]) == 1
    assert "3 comma-separated coefficients" in capsys.readouterr().err


# ------------------------------------------------------------------ detect


def test_detect_outputs(scene_png, tmp_path, capsys):
    rc = main(["detect", scene_png, "--out", str(tmp_path)])
    assert rc == 0
    stem = "scene_00000"
    for suffix in ("lanes.csv", "polylines.csv", "overlay.png", "effective_config.ini"):
        assert (tmp_path / f"{stem}_{suffix}").is_file()
    out = capsys.readouterr().out
    assert "lane(s)" in out

    records = (tmp_path / f"{stem}_lanes.csv").read_text().splitlines()
    assert records[0] == "lane_id,beta2,beta1,beta0,inlier_ratio,path_cost"
    assert len(records) == 3  # two planted markings found

    poly = (tmp_path / f"{stem}_polylines.csv").read_text().splitlines()
    assert poly[0] == "frame_id,lane_id,u,v"
    assert len(poly) > 2


def test_detect_reruns_byte_identical(scene_png, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["detect", scene_png, "--out", str(a)]) == 0
    assert main(["detect", scene_png, "--out", str(b)]) == 0
    for suffix in ("lanes.csv", "polylines.csv", "overlay.png", "effective_config.ini"):
        f = f"scene_00000_{suffix}"
        assert filecmp.cmp(a / f, b / f, shallow=False), f"{suffix} differs between runs"


def test_detect_effective_config_reparses_identically(scene_png, tmp_path):
    assert main(["detect", scene_png, "--out", str(tmp_path), "--seed", "5"]) == 0
    eff = read_run_config(tmp_path / "scene_00000_effective_config.ini")
    assert eff == dataclasses.replace(RunConfig(), seed=5)


def test_detect_debug_dumps_match_pipeline(scene_png, tmp_path):
    assert main(["detect", scene_png, "--out", str(tmp_path), "--debug-dumps"]) == 0
    cfg = RunConfig()
    result = detect(
        read_image(scene_png),
        cfg.camera(),
        cfg.ipm_grid(),
        cfg.fusion_weights(),
        cfg.extraction_config(),
        low=cfg.low_threshold,
        high=cfg.high_threshold,
        sigma=cfg.sigma,
        keep_intermediates=True,
    )
    inter = result.intermediates
    for name, expected in (
        ("edge", inter.features.edge),
        ("gray", inter.features.gray),
        ("fused", inter.features.fused),
        ("cost_raster", inter.cost_raster),
        ("cost_graph", inter.cost_graph),
    ):
        dumped = np.load(tmp_path / f"scene_00000_{name}.npy")
        assert np.array_equal(dumped, expected), f"{name} dump differs"
    ipm_png = read_image(tmp_path / "scene_00000_ipm.png")
    assert np.array_equal(ipm_png, inter.ipm)


def test_detect_missing_image_exits_1(tmp_path, capsys):
    assert main(["detect", str(tmp_path / "ghost.png"), "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_detect_missing_config_exits_2(scene_png, tmp_path, capsys):
    missing = tmp_path / "nope.ini"
    rc = main(["detect", scene_png, "--config", str(missing), "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "configuration error(s):" in err and str(missing) in err


def test_detect_bad_config_lists_all_violations(scene_png, tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(
        "[features]\nedge_weight = 0.9\ngray_weight = 0.9\nsigma = 0\n"
        "[extraction]\nbranch_radius = 0\n"
    )
    rc = main(["detect", scene_png, "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "sum to 1" in err
    assert "sigma must be positive" in err
    assert "branch radius" in err


def test_detect_blank_image_finds_nothing(tmp_path, capsys):
    from lanegraph.io import write_png

    blank = tmp_path / "blank.png"
    write_png(blank, np.zeros((960, 1280), dtype=np.uint8))
    rc = main(["detect", str(blank), "--out", str(tmp_path)])
    assert rc == 0
    assert "0 lane(s)" in capsys.readouterr().out
    records = (tmp_path / "blank_lanes.csv").read_text().splitlines()
    assert len(records) == 1  # header only


# -------------------------------------------------------------------- eval


def test_eval_dataset(scene_dir, tmp_path, capsys):
    rc = main(["eval", str(scene_dir), "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "frames 2, planted lanes 4" in out
    summary = read_json(tmp_path / "eval_summary.json")
    assert summary["n_frames"] == 2
    assert summary["planted_total"] == 4
    assert summary["matched_total"] == 4
    assert summary["precision"] == 1.0
    assert summary["false_lane_frame_fraction"] == 0.0
    assert [f["frame_id"] for f in summary["frames"]] == ["scene_00000", "scene_00001"]


def test_eval_skips_frames_without_truth(scene_dir, tmp_path, capsys):
    import shutil

    d = tmp_path / "data"
    d.mkdir()
    shutil.copy(scene_dir / "scene_00000.png", d / "scene_00000.png")
    shutil.copy(scene_dir / "scene_00000_gt.json", d / "scene_00000_gt.json")
    shutil.copy(scene_dir / "scene_00001.png", d / "orphan.png")  # no gt
    rc = main(["eval", str(d)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "no ground truth for orphan.png, skipping" in captured.err
    summary = read_json(d / "eval_summary.json")
    assert summary["n_frames"] == 1
    assert summary["skipped"] == ["orphan"]


def test_eval_empty_dataset(tmp_path, capsys):
    d = tmp_path / "nothing"
    d.mkdir()
    rc = main(["eval", str(d)])
    assert rc == 0
    assert "frames 0" in capsys.readouterr().out
    assert read_json(d / "eval_summary.json")["precision"] == 1.0


def test_eval_ignores_derived_images(scene_dir, tmp_path, capsys):
    import shutil

    d = tmp_path / "data"
    d.mkdir()
    shutil.copy(scene_dir / "scene_00000.png", d / "scene_00000.png")
    shutil.copy(scene_dir / "scene_00000_gt.json", d / "scene_00000_gt.json")
    # detect into the same directory: overlay must not be treated as a frame
    assert main(["detect", str(d / "scene_00000.png"), "--out", str(d)]) == 0
    capsys.readouterr()
    assert main(["eval", str(d)]) == 0
    summary = read_json(d / "eval_summary.json")
    assert summary["n_frames"] == 1
    assert summary["skipped"] == []


# ------------------------------------------------------------------- bench


def test_bench_small_sweep(tmp_path, capsys):
    ini = tmp_path / "bench.ini"
    ini.write_text("[bench]\nsizes = 8, 16\nrepetitions = 1\nall_pairs_max_nodes = 64\n")
    rc = main(["bench", "--config", str(ini), "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "dp scaling: log-log slope" in out
    assert "floyd_warshall skipped at 16x16: 256 nodes > 64-node cap" in out
    csv = (tmp_path / "benchmark.csv").read_text().splitlines()
    assert csv[0].startswith("solver,")
    solvers = {line.split(",")[0] for line in csv[1:]}
    assert solvers == {"dp", "dijkstra", "floyd_warshall"}
