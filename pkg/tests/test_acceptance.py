"""Acceptance suite: one criterion per test, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete. Reference accuracies for the end-to-end checks were computed once
with this pipeline and are frozen below as regression anchors.
"""

import json
import time

import numpy as np
import pytest

from mpcanet.cli import main
from mpcanet.config import parse_config
from mpcanet.data import SynthSpec, read_tensor, synth_generate, write_dataset, write_tensor
from mpcanet.mpca import EnergyPolicy, fit_mpca
from mpcanet.model_io import load_model, save_model
from mpcanet.network import (
    LayerConfig,
    PoolingConfig,
    box_anchors,
    forward,
    plan_geometry,
    pool_histograms,
    train_network,
    weight_maps,
)
from mpcanet.patches import PatchGeometry
from mpcanet.runner import bench_run, sweep_mpca_lda_run
from mpcanet.tensor_ops import kron_chain, mode_multiply, multi_mode_multiply, unfold

# frozen once from the finished pipeline (seed 7 generator, seeds 0..4 splits)
MPCANET1_SIGMA005_MEAN = 1.0
MPCANET1_SIGMA025_MEAN = 0.505
MPCANET2V_SIGMA025_MEAN = 0.715


def check(num, description, condition, detail=""):
    status = "PASS" if condition else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[criterion {num:2d}] {description}: {status}{suffix}")
    assert condition, f"criterion {num} failed: {description}{suffix}"


def synth_manifest(tmp_path, sigma):
    spec = SynthSpec(
        dims=(16, 16, 8),
        num_classes=4,
        samples_per_class=20,
        template_rank=2,
        noise_sigma=sigma,
        seed=7,
    )
    return str(write_dataset(synth_generate(spec), tmp_path / f"synth_{sigma}"))


def one_stage_config():
    return parse_config(
        {
            "architecture": "mpcanet1",
            "layers": [
                {"patch_dims": [3, 3, 8], "slide_modes": [0, 1], "filters": 8,
                 "energy_q": 0.97}
            ],
            "pooling": {"box_dims": [4, 4], "overlap": 0.5},
            "classifier": {"kind": "ridge", "lambda": 0.01},
            "seed": 0,
        }
    )


def two_stage_config():
    return parse_config(
        {
            "architecture": "mpcanet2-vector",
            "layers": [
                {"patch_dims": [3, 3, 8], "slide_modes": [0, 1], "filters": 8,
                 "energy_q": 0.97},
                {"patch_dims": [3, 3], "filters": 8, "energy_q": 0.97},
            ],
            "pooling": {"box_dims": [4, 4], "overlap": 0.5},
            "classifier": {"kind": "ridge", "lambda": 0.01},
            "seed": 0,
        }
    )


def test_criterion_01_tensor_algebra_oracles():
    start = time.monotonic()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        order = int(rng.integers(1, 5))
        dims = tuple(int(rng.integers(1, 5)) for _ in range(order))
        t = rng.normal(size=dims)
        us = [rng.normal(size=(int(rng.integers(1, 5)), dims[n])) for n in range(order)]
        y = multi_mode_multiply(t, list(enumerate(us)))
        mode = int(rng.integers(0, order))
        u = rng.normal(size=(int(rng.integers(1, 5)), dims[mode]))
        compat = np.max(
            np.abs(unfold(mode_multiply(t, u, mode), mode) - u @ unfold(t, mode))
        )
        worst = max(worst, compat)
        for n in range(order):
            others = [us[k] for k in range(order) if k != n]
            right = us[n] @ unfold(t, n)
            if others:
                right = right @ kron_chain(others).T
            worst = max(worst, np.max(np.abs(unfold(y, n) - right)))
    elapsed = time.monotonic() - start
    check(
        1,
        "unfold/mode-product compatibility and Kronecker identity on 200 tensors",
        worst < 1e-12 and elapsed < 5.0,
        f"max dev {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_pca_degeneracy():
    start = time.monotonic()
    rng = np.random.default_rng(102)
    samples = rng.normal(size=(50, 12)) * np.linspace(4.0, 0.25, 12)
    model = fit_mpca(list(samples), EnergyPolicy(q=0.97))
    centered = samples - samples.mean(axis=0)
    eigvals, eigvecs = np.linalg.eigh(centered.T @ centered)
    oracle = eigvecs[:, np.argsort(eigvals)[::-1][: model.output_dims[0]]]
    qa, _ = np.linalg.qr(model.factors[0])
    qb, _ = np.linalg.qr(oracle)
    residual = qb - qa @ (qa.T @ qb)
    angle = float(np.arcsin(np.clip(np.linalg.svd(residual, compute_uv=False).max(), 0, 1)))
    elapsed = time.monotonic() - start
    check(
        2,
        "order-1 fit matches the covariance eigendecomposition oracle",
        angle < 1e-8 and elapsed < 1.0,
        f"max principal angle {angle:.2e}, {elapsed:.2f}s",
    )


def test_criterion_03_scatter_monotonicity():
    rng = np.random.default_rng(103)
    violations = 0
    for _ in range(20):
        dims = tuple(int(rng.integers(2, top + 1)) for top in (6, 5, 4))
        samples = [rng.normal(size=dims) for _ in range(int(rng.integers(4, 10)))]
        model = fit_mpca(samples, EnergyPolicy(q=float(rng.uniform(0.6, 0.99))), max_iter=8)
        psi = model.psi_history
        if any(b < a - 1e-9 for a, b in zip(psi, psi[1:])):
            violations += 1
    check(
        3,
        "captured scatter non-decreasing across alternation sweeps (20 fits)",
        violations == 0,
        f"{violations} violations",
    )


def test_criterion_04_weighting_and_pooling_contracts():
    rng = np.random.default_rng(104)
    bad = 0
    for _ in range(1000):
        filters = int(rng.integers(1, 9))
        dims = (int(rng.integers(2, 11)), int(rng.integers(2, 9)))
        maps = [(rng.random(dims) > 0.5).astype(float) for _ in range(filters)]
        decimal = weight_maps(maps)
        if decimal.min() < 0 or decimal.max() > 2**filters - 1:
            bad += 1
            continue
        box = (int(rng.integers(1, dims[0] + 1)), int(rng.integers(1, dims[1] + 1)))
        pooling = PoolingConfig(box_dims=box, overlap_ratio=float(rng.uniform(0, 0.9)))
        pooled = pool_histograms(decimal, pooling, filters)
        boxes = pooled.reshape(-1, 2**filters)
        box_count = 1
        for extent, b, stride in zip(dims, box, pooling.strides):
            box_count *= len(box_anchors(extent, b, stride))
        if pooled.size != (2**filters) * box_count:
            bad += 1
        elif not np.all(boxes.sum(axis=1) == box[0] * box[1]):
            bad += 1
    check(
        4,
        "integer-map range, pooled length, and box mass on 1000 fuzzed stacks",
        bad == 0,
        f"{bad} bad cases",
    )


def test_criterion_05_protocol_shape():
    one = [
        LayerConfig(PatchGeometry((5, 5, 20), (0, 1)), 8, "tensor-mpca"),
    ]
    two = one + [LayerConfig(PatchGeometry((5, 5), (0, 1)), 8, "vector-pca")]
    pooling = PoolingConfig(box_dims=(16, 10), overlap_ratio=0.5)
    plan1 = plan_geometry((80, 50, 20), one, pooling)
    plan2 = plan_geometry((80, 50, 20), two, pooling)
    check(
        5,
        "80x50x20 protocol: B=81, one-stage 20736, two-stage 165888",
        plan1.box_count == 81
        and plan1.feature_dim == 20736
        and plan2.box_count == 81
        and plan2.feature_dim == 165888,
        f"B={plan1.box_count}, f1={plan1.feature_dim}, f2={plan2.feature_dim}",
    )


def test_criterion_06_end_to_end_synthetic(tmp_path):
    start = time.monotonic()
    manifest = synth_manifest(tmp_path, 0.05)
    out = bench_run(one_stage_config(), manifest, splits=5, seed_base=0, ratio=0.5)
    mean = out["summary"][0]["mean"]
    elapsed = time.monotonic() - start
    check(
        6,
        "one-stage network reaches >= 0.90 mean accuracy on the sigma=0.05 task",
        mean >= 0.90
        and abs(mean - MPCANET1_SIGMA005_MEAN) <= 0.05
        and elapsed < 60.0,
        f"mean {mean:.3f} vs anchor {MPCANET1_SIGMA005_MEAN}, {elapsed:.1f}s",
    )


def test_criterion_07_two_stage_direction(tmp_path):
    manifest = synth_manifest(tmp_path, 0.25)
    one = bench_run(one_stage_config(), manifest, splits=5, seed_base=0, ratio=0.5)
    two = bench_run(two_stage_config(), manifest, splits=5, seed_base=0, ratio=0.5)
    mean1 = one["summary"][0]["mean"]
    mean2 = two["summary"][0]["mean"]
    check(
        7,
        "two-stage vector variant is not worse than one-stage by more than 0.05",
        mean2 >= mean1 - 0.05
        and abs(mean1 - MPCANET1_SIGMA025_MEAN) <= 0.05
        and abs(mean2 - MPCANET2V_SIGMA025_MEAN) <= 0.05,
        f"two-stage {mean2:.3f} vs one-stage {mean1:.3f}",
    )


def test_criterion_08_mpca_lda_sweep(tmp_path):
    manifest = synth_manifest(tmp_path, 0.05)
    out = sweep_mpca_lda_run(
        manifest, d_min=10, d_max=100, d_step=10, splits=5, seed_base=0, ratio=0.5
    )
    complete = len(out["rows"]) == 50
    no_failures = all(r["status"] in ("ok", "skipped") for r in out["rows"])
    ok_rows = [r for r in out["rows"] if r["status"] == "ok"]
    check(
        8,
        "MPCA+LDA d=10..100 sweep completes and best mean accuracy >= 0.8",
        complete
        and no_failures
        and len(ok_rows) > 0
        and out["best_accuracy"] is not None
        and out["best_accuracy"] >= 0.8,
        f"{len(out['rows'])} rows, best d={out['best_d']} at {out['best_accuracy']}",
    )


def test_criterion_09_cli_determinism(tmp_path, capsys):
    manifest = synth_manifest(tmp_path, 0.05)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(one_stage_config().model_dump(by_alias=True)))
    m1, m2 = tmp_path / "a.mpcm", tmp_path / "b.mpcm"
    for m in (m1, m2):
        code = main(
            ["train", "--config", str(config_path), "--data", manifest, "--model", str(m)]
        )
        assert code == 0
    models_equal = m1.read_bytes() == m2.read_bytes()
    capsys.readouterr()  # drain the train output before comparing bench rows

    bench_args = [
        "bench", "--config", str(config_path), "--data", manifest,
        "--splits", "3", "--seed", "0", "--csv",
    ]
    assert main(bench_args) == 0
    rows1 = capsys.readouterr().out
    assert main(bench_args) == 0
    rows2 = capsys.readouterr().out
    with capsys.disabled():
        check(
            9,
            "repeated cmd_train is bitwise identical; bench rows identical",
            models_equal and rows1 == rows2,
            f"model files equal: {models_equal}",
        )


def test_criterion_10_serialization_round_trips(tmp_path):
    rng = np.random.default_rng(110)
    bad = 0
    for i in range(500):
        order = int(rng.integers(1, 5))
        dims = tuple(int(rng.integers(1, 6)) for _ in range(order))
        t = rng.normal(size=dims)
        path = tmp_path / "t.tobj"
        write_tensor(path, t)
        back = read_tensor(path)
        if back.shape != t.shape or back.tobytes() != t.tobytes():
            bad += 1

    inputs = [rng.normal(size=(8, 8, 4)) for _ in range(10)]
    cfgs = [
        LayerConfig(PatchGeometry((3, 3, 4), (0, 1)), 4, "tensor-mpca", EnergyPolicy(0.97)),
    ]
    net = train_network(inputs, "mpcanet1", cfgs, PoolingConfig((4, 4), 0.5))
    model_path = tmp_path / "net.mpcm"
    save_model(model_path, net)
    loaded, _ = load_model(model_path)
    exact = True
    for _ in range(20):
        probe = rng.normal(size=(8, 8, 4))
        if not np.array_equal(forward(net, probe), forward(loaded, probe)):
            exact = False
            break
    check(
        10,
        "500 tensor files round-trip bitwise; network forward exact after reload",
        bad == 0 and exact,
        f"{bad} tensor mismatches, forward exact: {exact}",
    )
