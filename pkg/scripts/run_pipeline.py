#!/usr/bin/env python3
"""Run one full pruning pipeline and print where the artifacts landed.

Usage: python scripts/run_pipeline.py [--seed N] [--out DIR] [--engine nsga2|moead]
"""

import argparse

from evoprune.cli import cmd_pipeline
from evoprune.config import default_config


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/pipeline")
    parser.add_argument("--engine", choices=["nsga2", "moead"], default="nsga2")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    cfg = default_config()
    cfg.seed = args.seed
    cfg.out_dir = args.out
    cfg.jobs = args.jobs
    cfg.phase2.engine = args.engine
    manifest = cmd_pipeline(cfg)
    print(f"artifacts written under {args.out} (manifest: {manifest})")


if __name__ == "__main__":
    main()
