"""Acceptance suite: one test per criterion, each printing a PASS line.

The desk-scale study (criteria 5-7, 10) runs the real CLI pipeline for
ten master seeds with both engines and asserts on the exported artifacts
only, never on in-memory state.
"""

import json
import shutil
import time

import numpy as np
import pytest

from evoprune.cli import cmd_phase2, cmd_pipeline, cmd_report
from evoprune.config import default_config
from evoprune.moea import (
    EAConfig,
    Problem,
    TraceRow,
    bitflip_mutation,
    fast_nondominated_sort,
    moead_run,
    nsga2_run,
    polynomial_mutation,
    sbx_crossover,
    stream,
    uniform_crossover,
)
from evoprune.network import accuracy, apply_mask, apply_threshold, load_checkpoint, nonzero_count
from evoprune.pareto import NormalizationSpec, dominates, hypervolume2
from evoprune.phase2 import sample_mask_bits
from tests.test_cli import read_front_csv

N_SEEDS = 10


def study_config(out_dir, seed):
    cfg = default_config()
    cfg.seed = seed
    cfg.out_dir = str(out_dir)
    cfg.phase1.ea.generations = 20  # pinned by criterion 5
    cfg.phase2.ea.generations = 20
    return cfg


@pytest.fixture(scope="module")
def study(tmp_path_factory):
    """Ten seeded desk-scale runs; moead reruns phase 2 on copied artifacts."""
    root = tmp_path_factory.mktemp("study")
    runs = []
    for seed in range(N_SEEDS):
        out_n = root / f"seed{seed}_nsga2"
        cfg = study_config(out_n, seed)
        cmd_pipeline(cfg)
        out_m = root / f"seed{seed}_moead"
        shutil.copytree(out_n, out_m)
        cfg_m = study_config(out_m, seed)
        cfg_m.phase2.engine = "moead"
        cmd_phase2(cfg_m)
        cmd_report(cfg_m)
        runs.append({"seed": seed, "nsga2": out_n, "moead": out_m})
    return runs


def _summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def _checkpoint_meta(out_dir):
    return json.loads((out_dir / "checkpoint" / "manifest.json").read_text())["meta"]


# ---------------------------------------------------------------------------


def test_a1_sorting_matches_brute_force_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(100):
        pts = [tuple(p) for p in rng.random((200, 2)).round(2)]  # ties included
        got = [sorted(f) for f in fast_nondominated_sort(pts)]
        # oracle: recompute the non-dominated layer from scratch each peel
        arr = np.array(pts)
        remaining = np.arange(200)
        expected = []
        while len(remaining):
            sub = arr[remaining]
            le = (sub[:, None, :] <= sub[None, :, :]).all(axis=2)
            lt = (sub[:, None, :] < sub[None, :, :]).any(axis=2)
            dominated = (le & lt).any(axis=0)
            layer = remaining[~dominated]
            expected.append(sorted(layer.tolist()))
            remaining = remaining[dominated]
        assert got == expected
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"\n[A1] PASS sorting oracle: 100 populations of 200, exact, {elapsed:.2f}s")


def test_a2_hypervolume_matches_monte_carlo():
    t0 = time.perf_counter()
    norm = NormalizationSpec(f1_ref=1)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        pts = [tuple(p) for p in rng.random((int(rng.integers(1, 21)), 2))]
        exact = hypervolume2(pts, norm)
        samples = rng.random((1_000_000, 2))
        covered = np.zeros(len(samples), dtype=bool)
        for x, y in pts:
            covered |= (samples[:, 0] >= x) & (samples[:, 1] >= y)
        estimate = covered.mean()
        worst = max(worst, abs(exact - estimate))
        assert abs(exact - estimate) <= 0.01
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    print(f"\n[A2] PASS hypervolume oracle: 50 fronts, worst |err|={worst:.4f}, {elapsed:.1f}s")


def test_a3_importance_init_statistics():
    # per-bit retention over 1e4 pre-normalization draws, one eligible layer
    rng = np.random.default_rng(12)
    w = rng.normal(size=(20, 10)).ravel()
    w[rng.random(200) > 0.75] = 0.0
    nz = np.abs(w[w != 0.0])
    scores = nz / nz.max()
    lam = 0.5
    trials = 10_000
    hits = np.zeros(len(scores))
    for t in range(trials):
        hits += sample_mask_bits(scores, lam, stream(900, t))
    freq = hits / trials
    expected = 1.0 - lam * (1.0 - scores)
    max_dev = float(np.max(np.abs(freq - expected)))
    assert max_dev <= 0.02

    # forced-one behavior is exact for excluded and still-dense layers
    from evoprune.network import Layer, Network
    from evoprune.phase2 import ImportanceInitConfig, build_mask_layout

    dense_w = rng.normal(size=(10, 10))  # sparsity 0 < S
    sparse_w = rng.normal(size=(10, 10))
    sparse_w[rng.random((10, 10)) < 0.5] = 0.0
    net = Network([
        Layer("in", np.eye(4), np.zeros(4), prunable=False),
        Layer("early", np.abs(rng.normal(size=(4, 25))) + 0.1, np.zeros(25), prunable=True),
        Layer("dense", np.abs(dense_w) + 0.1, np.zeros(10), prunable=True),
        Layer("deep", sparse_w, np.zeros(10), prunable=True),
    ])
    icfg = ImportanceInitConfig(
        sparsity_threshold=0.2, excluded_layers=frozenset({"early"}), seed=0
    )
    layout = build_mask_layout(net, icfg)
    n_early = 100
    n_dense = 100
    assert np.all(layout.forced[:n_early])  # excluded layer
    assert np.all(layout.forced[n_early : n_early + n_dense])  # sparsity < S
    assert not np.any(layout.forced[n_early + n_dense :])  # eligible layer free
    print(f"\n[A3] PASS importance-init statistics: max deviation {max_dev:.4f} <= 0.02; "
          "forced-one paths exact")


def toy_problem():
    def evaluate(g):
        x = float(g[0])
        return (x * x, (x - 2.0) ** 2)

    return Problem(
        kind="continuous", length=1, evaluate=evaluate,
        lower=np.array([-4.0]), upper=np.array([4.0]), name="toy",
    )


def test_a4_analytic_pareto_set_both_engines():
    t0 = time.perf_counter()
    cfg = EAConfig(population=50, generations=50, seed=2)  # operator defaults per config
    front_n = nsga2_run(toy_problem(), cfg)
    front_m = moead_run(toy_problem(), cfg)
    norm = NormalizationSpec(f1_ref=1)
    hvs = {}
    for name, front in [("nsga2", front_n), ("moead", front_m)]:
        xs = np.array([s.genome[0] for s in front.solutions])
        assert np.all(xs >= -0.05) and np.all(xs <= 2.05), name
        hvs[name] = hypervolume2([(s.f1 / 4.0, s.f2 / 4.0) for s in front.solutions], norm)
    diff = abs(hvs["nsga2"] - hvs["moead"])
    assert diff <= 0.02
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(f"\n[A4] PASS analytic Pareto set: decision values in [0,2]±0.05, "
          f"HV diff {diff:.4f} <= 0.02, {elapsed:.1f}s")


def test_a5_desk_scale_end_to_end(study):
    passes = 0
    details = []
    for run in study:
        meta = _checkpoint_meta(run["nsga2"])
        baseline_ok = meta["baseline_val_accuracy"] >= 0.95
        base_nz = meta["baseline_nonzeros"]
        base_err = meta["baseline_val_error"]
        _, rows = read_front_csv(run["nsga2"] / "p1.csv")
        best_ok = any(
            float(r["f1_raw"]) <= 0.75 * base_nz
            and float(r["f2_val"]) <= base_err + 0.02
            for r in rows
        )
        manifest = json.loads((run["nsga2"] / "run_manifest.json").read_text())
        wall = sum(manifest["stage_seconds"].values())
        time_ok = wall <= 600.0
        passes += baseline_ok and best_ok and time_ok
        details.append((baseline_ok, best_ok, round(wall, 1)))
    assert passes >= 8, details
    print(f"\n[A5] PASS desk-scale end-to-end: {passes}/10 seeds "
          f"(baseline >= 95%, >= 25% reduction within 2pp, pipeline <= 10 min)")


def test_a6_hv_improvement_both_engines(study):
    counts = {"nsga2": 0, "moead": 0}
    for run in study:
        for engine in counts:
            s = _summary(run[engine])
            counts[engine] += s["final_hv"] > s["phase1_hv"]
    assert counts["nsga2"] >= 8, counts
    assert counts["moead"] >= 8, counts
    print(f"\n[A6] PASS merged HV strictly exceeds phase-1 HV: "
          f"nsga2 {counts['nsga2']}/10, moead {counts['moead']}/10")


def test_a7_dominating_solutions(study):
    counts = {"nsga2": 0, "moead": 0}
    for run in study:
        for engine in counts:
            p2_meta, p2_rows = read_front_csv(run[engine] / "p2.csv")
            light = (float(p2_meta["light_f1"]), float(p2_meta["light_f2"]))
            pts = [(float(r["f1"]), float(r["f2_opt"])) for r in p2_rows]
            counts[engine] += any(dominates(p, light) for p in pts)
    assert counts["nsga2"] >= 7, counts
    assert counts["moead"] >= 7, counts
    print(f"\n[A7] PASS phase-2 dominates the light anchor: "
          f"nsga2 {counts['nsga2']}/10, moead {counts['moead']}/10")


def test_a8_reproducibility_across_jobs(tmp_path):
    files = ["p1.csv", "p2.csv", "p2_masks.txt", "summary.json"]
    outputs = {}
    for jobs in (1, 4):
        out = tmp_path / f"jobs{jobs}"
        cfg = study_config(out, seed=0)
        cfg.jobs = jobs
        cmd_pipeline(cfg)
        outputs[jobs] = {f: (out / f).read_bytes() for f in files}
    for f in files:
        assert outputs[1][f] == outputs[4][f], f
    print("\n[A8] PASS reproducibility: P1/P2/summary bit-identical for --jobs 1 vs --jobs 4")


def test_a9_operator_properties():
    lo, hi = np.array([-1.0, 0.0]), np.array([1.0, 4.0])
    rng = np.random.default_rng(42)
    for _ in range(10_000):
        p1, p2 = rng.uniform(lo, hi), rng.uniform(lo, hi)
        c1, c2 = sbx_crossover(p1, p2, lo, hi, 15.0, 0.9, rng)
        m = polynomial_mutation(c1, lo, hi, 20.0, 0.2, rng)
        assert np.all(c1 >= lo) and np.all(c1 <= hi)
        assert np.all(c2 >= lo) and np.all(c2 <= hi)
        assert np.all(m >= lo) and np.all(m <= hi)

    for _ in range(10_000):
        b1 = (rng.random(24) < 0.5).astype(np.uint8)
        b2 = (rng.random(24) < 0.5).astype(np.uint8)
        c1, c2 = uniform_crossover(b1, b2, 0.9, rng)
        assert np.array_equal(c1 + c2, b1 + b2)

    n, p = 10_000, 0.05
    flips = int(bitflip_mutation(np.zeros(n, dtype=np.uint8), p, rng).sum())
    sigma = (n * p * (1 - p)) ** 0.5
    assert abs(flips - n * p) <= 3 * sigma

    trace: list[TraceRow] = []
    moead_run(toy_problem(), EAConfig(population=30, generations=30, seed=5), trace=trace)
    z1 = [r.best_f1 for r in trace]
    z2 = [r.best_f2 for r in trace]
    assert all(a >= b for a, b in zip(z1, z1[1:]))
    assert all(a >= b for a, b in zip(z2, z2[1:]))
    print(f"\n[A9] PASS operator properties: bounds/conservation over 1e4 trials, "
          f"bit-flip count {flips} within 3 sigma, MOEA/D ideal point monotone")


def test_a10_recompute_integrity(study):
    from evoprune.cli import _make_data

    checked_rows = 0
    for run in study[:3]:  # three seeds x two engines is plenty of coverage
        cfg = study_config(run["nsga2"], run["seed"])
        base, meta = load_checkpoint(run["nsga2"] / "checkpoint")
        _, val_set, opt_set, _ = _make_data(cfg)

        _, p1_rows = read_front_csv(run["nsga2"] / "p1.csv")
        for r in p1_rows:
            pruned = apply_threshold(base, float(r["th1"]), float(r["th2"]))
            assert nonzero_count(pruned) == int(r["f1_raw"])
            assert 1.0 - accuracy(pruned, opt_set) == float(r["f2_opt"])
            assert 1.0 - accuracy(pruned, val_set) == float(r["f2_val"])
            checked_rows += 1

        for engine in ("nsga2", "moead"):
            from evoprune.phase2 import load_phase2

            front, p2_meta = load_phase2(
                run[engine] / "p2.csv", run[engine] / "p2_masks.txt"
            )
            heavy = apply_threshold(
                base, float(p2_meta["heavy_th1"]), float(p2_meta["heavy_th2"])
            )
            assert nonzero_count(heavy) == int(p2_meta["heavy_f1"])
            for sol in front.solutions:
                masked = apply_mask(heavy, sol.genome)
                assert nonzero_count(masked) == sol.f1
                assert 1.0 - accuracy(masked, opt_set) == sol.f2
                assert 1.0 - accuracy(masked, val_set) == sol.f2_val
                checked_rows += 1
    print(f"\n[A10] PASS recompute integrity: {checked_rows} exported solutions "
          "reproduce stored f1 exactly and f2 to the last digit")
