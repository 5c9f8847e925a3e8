"""End-to-end smoke tests for the python bindings and the CLI."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

import salpipe


@pytest.fixture(scope="module")
def synth_pair():
    img, gt = salpipe.synth_image(seed=7, side=64)
    return np.asarray(img), np.asarray(gt)


def test_version():
    assert salpipe.__version__


def test_color_conversions_roundtrip_values():
    img = np.zeros((2, 2, 3), dtype=np.uint8)
    img[0, 0] = (255, 255, 255)
    lab = salpipe.rgb_to_lab(img)
    assert lab.shape == (2, 2, 3)
    assert abs(lab[0, 0, 0] - 100.0) < 1e-3
    assert abs(lab[1, 1, 0]) < 1e-9

    hsv = salpipe.rgb_to_hsv(np.full((1, 1, 3), (255, 0, 0), dtype=np.uint8))
    assert hsv[0, 0, 0] == 0.0
    assert hsv[0, 0, 1] == 1.0


def test_warp_identity():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(5, 5, 3), dtype=np.uint8)
    out = salpipe.warp_to_square(img, 5)
    assert np.array_equal(out, img)


def test_segmentation_partition(synth_pair):
    img, _ = synth_pair
    labels = salpipe.graph_segment(img, k=150.0, min_size=10)
    assert labels.shape == img.shape[:2]
    assert labels.min() == 0
    n = labels.max() + 1
    assert np.array_equal(np.unique(labels), np.arange(n))

    stack = salpipe.build_stack(img, levels=3, finest_target=40, coarsest_target=10)
    assert len(stack) == 3
    counts = [lbl.max() + 1 for lbl in stack]
    assert counts == sorted(counts, reverse=True)


def test_crf_zero_pairwise_identity(synth_pair):
    img, _ = synth_pair
    rng = np.random.default_rng(11)
    init = rng.random(img.shape[:2])
    out = salpipe.crf_refine(img, init, w1=0.0, w2=0.0)
    assert np.allclose(out, np.clip(init, 1e-6, 1 - 1e-6), atol=0, rtol=0)


def test_metrics_identities(synth_pair):
    _, gt = synth_pair
    perfect = gt.astype(np.float64)
    assert salpipe.mae(perfect, gt) == 0.0
    assert salpipe.max_f(perfect, gt) == pytest.approx(1.0)
    assert salpipe.auc(perfect, gt) == pytest.approx(1.0)
    curve = salpipe.pr_roc(perfect, gt)
    assert curve.shape == (256, 4)
    assert salpipe.label_consistency([gt, gt, gt]) == 1.0
    vote = salpipe.majority_gt([gt, gt, 1 - gt])
    assert np.array_equal(vote, gt)


def test_fusion_exact_fit(synth_pair):
    _, gt = synth_pair
    alphas, residual = salpipe.fit_fusion([[gt.astype(np.float64)]], [gt])
    assert alphas[0] == pytest.approx(1.0, abs=1e-6)
    fused = salpipe.fuse([gt.astype(np.float64)], [1.0])
    assert salpipe.mae(fused, gt) == 0.0
    assert residual < 1e-6


def test_micro_pipeline(tmp_path):
    data = tmp_path / "data"
    salpipe.synth_dataset(8, 5, str(data))
    config = json.dumps(
        {
            "seed": 11,
            "levels": 2,
            "finest_target": 30,
            "coarsest_target": 10,
            "input_side": 16,
            "hidden": 24,
            "epochs": 2,
            "forest": {"n_trees": 8, "max_depth": 6},
            "crf": {"iterations": 2},
            "split": [4, 1, 0],
            "jobs": 1,
        }
    )
    summary = salpipe.train(str(data), str(tmp_path / "bundle"), config)
    assert summary["samples"] > 0

    results = salpipe.infer(
        str(data / "images" / "synth_0000.png"),
        str(tmp_path / "bundle"),
        str(tmp_path / "out"),
        model="hdhf",
    )
    final = results[0]["final"]
    assert final.min() >= 0.0 and final.max() <= 1.0
    assert (tmp_path / "out" / "synth_0000.png").exists()

    report = salpipe.evaluate(str(data / "gt"), str(data / "gt"), str(tmp_path / "eval_"))
    assert report["images"] == 8
    assert report["mae"] == pytest.approx(0.0)
    assert report["max_f"] == pytest.approx(1.0)


def test_cli_synth_and_eval(tmp_path):
    cli = os.environ.get("SALPIPE_CLI")
    if not cli:
        pytest.skip("SALPIPE_CLI not set")
    data = tmp_path / "cli_data"
    run = subprocess.run(
        [cli, "synth", "--n", "3", "--seed", "2", "--out", str(data)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    assert (data / "images" / "synth_0000.png").exists()

    run = subprocess.run(
        [
            cli, "eval",
            "--maps", str(data / "gt"),
            "--gt", str(data / "gt"),
            "--out", str(tmp_path / "cli_eval_"),
        ],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    assert (tmp_path / "cli_eval_summary.json").exists()
    summary = json.loads((tmp_path / "cli_eval_summary.json").read_text())
    assert summary["mae"] == pytest.approx(0.0)

    # machine-readable error line on a bad invocation
    run = subprocess.run(
        [cli, "eval", "--maps", str(tmp_path / "nope"), "--gt", str(data / "gt")],
        capture_output=True,
        text=True,
    )
    assert run.returncode != 0
    assert run.stderr.startswith("error: {")
