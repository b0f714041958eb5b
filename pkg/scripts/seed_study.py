#!/usr/bin/env python3
"""Multi-seed study: run the desk-scale pipeline for a range of master
seeds with both phase-2 engines and print averaged front statistics
(phase-1 HV, refined-front sizes, dominating counts, final HV).

Usage: python scripts/seed_study.py [--seeds N] [--out DIR] [--generations G]
"""

import argparse
import json
import shutil
from pathlib import Path

from evoprune.cli import cmd_phase2, cmd_pipeline, cmd_report
from evoprune.config import default_config


def build_config(out_dir, seed, generations):
    cfg = default_config()
    cfg.seed = seed
    cfg.out_dir = str(out_dir)
    cfg.phase1.ea.generations = generations
    cfg.phase2.ea.generations = generations
    return cfg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--out", default="runs/study")
    parser.add_argument("--generations", type=int, default=20)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    root = Path(args.out)
    summaries = {"nsga2": [], "moead": []}
    for seed in range(args.seeds):
        out_n = root / f"seed{seed}_nsga2"
        cfg = build_config(out_n, seed, args.generations)
        cfg.jobs = args.jobs
        cmd_pipeline(cfg)
        summaries["nsga2"].append(json.loads((out_n / "summary.json").read_text()))

        out_m = root / f"seed{seed}_moead"
        if out_m.exists():
            shutil.rmtree(out_m)
        shutil.copytree(out_n, out_m)
        cfg_m = build_config(out_m, seed, args.generations)
        cfg_m.jobs = args.jobs
        cfg_m.phase2.engine = "moead"
        cmd_phase2(cfg_m)
        cmd_report(cfg_m)
        summaries["moead"].append(json.loads((out_m / "summary.json").read_text()))

    def mean(vals):
        return sum(vals) / len(vals)

    print(f"\naverages over {args.seeds} seeds "
          f"(phase-1/phase-2 generations = {args.generations}):")
    print(f"  phase-1 HV:                {mean([s['phase1_hv'] for s in summaries['nsga2']]):.3f}")
    for engine in ("nsga2", "moead"):
        rows = summaries[engine]
        print(f"  [{engine}]")
        print(f"    refined front size:      {mean([s['phase2_pareto_solutions'] for s in rows]):.2f}")
        print(f"    dominating light anchor: "
              f"{mean([s['phase2_dominating_light_anchor'] for s in rows]):.2f}")
        print(f"    final HV:                {mean([s['final_hv'] for s in rows]):.3f}")
        print(f"    HV gain:                 {mean([s['hv_delta'] for s in rows]):+.3f}")


if __name__ == "__main__":
    main()
