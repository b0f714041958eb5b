"""Command-line pipeline: train -> phase1 -> anchors -> phase2 -> report.

Every stage regenerates its inputs deterministically from the config and
master seed, so stages can run standalone or as one pipeline and still
produce bit-identical artifacts.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
import time
from pathlib import Path

from . import datasets, network, phase1, phase2
from .config import (
    RunConfig,
    config_to_dict,
    default_config,
    derive_stage_seeds,
    load_config,
    save_config,
)
from .errors import (
    AnchorSelectionError,
    ConfigError,
    ContractViolationError,
    CorridorError,
    DegenerateLayerError,
    EmptyDataError,
    EvoPruneError,
    FormatError,
    InvalidIntervalError,
    InvalidSpecError,
    ShapeError,
)
from .moea import TraceRow
from .pareto import NormalizationSpec, dominance_report, hypervolume2, merge_fronts
from .svgplot import write_front_svg
from .textio import fmt, write_records

MANIFEST_VERSION = 1

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_OPTIMIZATION = 4


def _paths(cfg: RunConfig) -> dict[str, Path]:
    out = Path(cfg.out_dir)
    return {
        "out": out,
        "config": out / "config.json",
        "data_dir": out / "data",
        "checkpoint": out / "checkpoint",
        "p1": out / "p1.csv",
        "p1_trace": out / "p1_trace.csv",
        "p2": out / "p2.csv",
        "p2_masks": out / "p2_masks.txt",
        "p2_trace": out / "p2_trace.csv",
        "summary": out / "summary.json",
        "plot": out / "front.svg",
        "manifest": out / "run_manifest.json",
    }


def _make_data(cfg: RunConfig):
    seeds = derive_stage_seeds(cfg.seed)
    data = datasets.generate_blobs(
        cfg.dataset.classes,
        cfg.dataset.dim,
        cfg.dataset.per_class,
        cfg.dataset.spread,
        seed=seeds["data"],
    )
    split = datasets.SplitSpec(
        train_fraction=cfg.split.train_fraction,
        val_fraction=cfg.split.val_fraction,
        opt_per_class=cfg.split.opt_per_class,
        seed=seeds["split"],
    )
    return datasets.stratified_split(data, split)


def _eval_set(cfg_subset: str, opt_set, val_set):
    return val_set if cfg_subset == "val" else opt_set


def _update_manifest(cfg: RunConfig, artifacts: dict[str, str], seconds: dict[str, float]) -> Path:
    paths = _paths(cfg)
    manifest_path = paths["manifest"]
    existing = {}
    if manifest_path.exists():
        try:
            existing = json.loads(manifest_path.read_text())
        except json.JSONDecodeError:
            existing = {}
    merged_artifacts = dict(existing.get("artifacts", {}))
    merged_artifacts.update(artifacts)
    for name, rel in merged_artifacts.items():
        target = paths["out"] / rel
        if not target.exists():
            raise FormatError(f"manifest references missing artifact {name}: {target}")
    merged_seconds = dict(existing.get("stage_seconds", {}))
    merged_seconds.update({k: round(v, 3) for k, v in seconds.items()})
    manifest = {
        "format_version": MANIFEST_VERSION,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "config": config_to_dict(cfg),
        "artifacts": merged_artifacts,
        "stage_seconds": merged_seconds,
    }
    paths["out"].mkdir(parents=True, exist_ok=True)
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def _write_trace(path: Path, trace: list[TraceRow], norm: NormalizationSpec) -> None:
    rows = []
    for row in trace:
        hv = hypervolume2(row.front, norm) if row.front else 0.0
        rows.append([row.generation, fmt(row.best_f1), fmt(row.best_f2), fmt(hv)])
    write_records(
        path,
        {"format": "evoprune-trace-v1"},
        ["generation", "best_f1", "best_f2", "hypervolume"],
        rows,
    )


# ---------------------------------------------------------------------------
# stages


def cmd_train(cfg: RunConfig) -> Path:
    """Generate data, train the baseline, persist checkpoint and data CSVs."""
    t0 = time.time()
    paths = _paths(cfg)
    seeds = derive_stage_seeds(cfg.seed)
    train_set, val_set, opt_set, test_set = _make_data(cfg)
    for name, subset in [
        ("train", train_set), ("val", val_set), ("opt", opt_set), ("test", test_set)
    ]:
        datasets.save_labeled_csv(subset, paths["data_dir"] / f"{name}.csv")

    net = network.init_network(
        cfg.widths, seed=seeds["network"], first_layer_prunable=cfg.first_layer_prunable
    )
    tcfg = network.TrainConfig(
        epochs=cfg.train.epochs,
        learning_rate=cfg.train.learning_rate,
        batch_size=cfg.train.batch_size,
        beta1=cfg.train.beta1,
        beta2=cfg.train.beta2,
        epsilon=cfg.train.epsilon,
        seed=seeds["train"],
    )
    trained = network.train(net, train_set, tcfg)
    baseline_nz = network.nonzero_count(trained)
    val_acc = network.accuracy(trained, val_set)
    opt_acc = network.accuracy(trained, opt_set)
    meta = {
        "master_seed": cfg.seed,
        "widths": list(cfg.widths),
        "baseline_nonzeros": baseline_nz,
        "baseline_val_accuracy": val_acc,
        "baseline_val_error": 1.0 - val_acc,
        "baseline_opt_error": 1.0 - opt_acc,
    }
    network.save_checkpoint(trained, paths["checkpoint"], meta=meta)
    save_config(cfg, paths["config"])
    print(f"baseline: nonzero weights = {baseline_nz}, validation accuracy = {val_acc:.4f}")
    _update_manifest(
        cfg,
        {
            "checkpoint": "checkpoint",
            "config": "config.json",
            "data_train": "data/train.csv",
            "data_val": "data/val.csv",
            "data_opt": "data/opt.csv",
            "data_test": "data/test.csv",
        },
        {"train": time.time() - t0},
    )
    return paths["checkpoint"]


def cmd_phase1(cfg: RunConfig) -> Path:
    """Run the threshold search against the stored checkpoint."""
    t0 = time.time()
    paths = _paths(cfg)
    seeds = derive_stage_seeds(cfg.seed)
    base, meta = network.load_checkpoint(paths["checkpoint"])
    _, val_set, opt_set, _ = _make_data(cfg)
    ea = dataclasses.replace(cfg.phase1.ea, seed=seeds["phase1"])
    trace: list[TraceRow] = []
    front = phase1.run_phase1(
        base,
        _eval_set(cfg.phase1.eval_subset, opt_set, val_set),
        ea,
        engine=cfg.phase1.engine,
        jobs=cfg.jobs,
        trace=trace,
    )
    phase1.rescore_phase1(front, base, val_set)
    baseline_nz = int(meta.get("baseline_nonzeros", network.nonzero_count(base)))
    phase1.export_phase1(
        front, paths["p1"], baseline_nz, cfg.phase1.engine, cfg.phase1.eval_subset
    )
    _write_trace(paths["p1_trace"], trace, NormalizationSpec(f1_ref=baseline_nz))
    best = min(front.solutions, key=lambda s: s.f2)
    print(
        f"phase1: {len(front)} front solutions; best error {best.f2:.4f} "
        f"at {best.f1:.0f} nonzeros"
    )
    _update_manifest(
        cfg, {"p1": "p1.csv", "p1_trace": "p1_trace.csv"}, {"phase1": time.time() - t0}
    )
    return paths["p1"]


def cmd_phase2(cfg: RunConfig) -> Path:
    """Select anchors from the stored coarse front and refine binary masks."""
    t0 = time.time()
    paths = _paths(cfg)
    seeds = derive_stage_seeds(cfg.seed)
    base, meta = network.load_checkpoint(paths["checkpoint"])
    _, val_set, opt_set, _ = _make_data(cfg)
    p1_front, p1_meta = phase1.load_phase1(paths["p1"])
    try:
        heavy, light = phase2.select_anchors(p1_front, cfg.anchor)
    except AnchorSelectionError:
        print(f"anchor selection failed; coarse front in {paths['p1']}", file=sys.stderr)
        raise
    corridor = phase2.build_corridor(base, heavy, light, cfg.bins, cfg.phase2.ea.population)
    icfg = dataclasses.replace(
        phase2.resolve_excluded(cfg.importance, corridor.heavy), seed=seeds["importance"]
    )
    ea = dataclasses.replace(cfg.phase2.ea, seed=seeds["phase2"])
    trace: list[TraceRow] = []
    front = phase2.run_phase2(
        corridor,
        _eval_set(cfg.phase2.eval_subset, opt_set, val_set),
        ea,
        icfg,
        engine=cfg.phase2.engine,
        jobs=cfg.jobs,
        importance_bias_mutation=cfg.importance_bias_mutation,
        trace=trace,
    )
    phase2.rescore_phase2(front, corridor.heavy, val_set)
    baseline_nz = int(meta.get("baseline_nonzeros", network.nonzero_count(base)))
    if p1_meta.get("baseline_nonzeros") not in (None, str(baseline_nz)):
        raise FormatError(
            f"{paths['p1']}: baseline_nonzeros {p1_meta['baseline_nonzeros']} does not "
            f"match checkpoint ({baseline_nz})"
        )
    phase2.export_phase2(
        front,
        paths["p2"],
        paths["p2_masks"],
        baseline_nz,
        cfg.phase2.engine,
        heavy,
        light,
        cfg.phase2.eval_subset,
    )
    _write_trace(paths["p2_trace"], trace, NormalizationSpec(f1_ref=baseline_nz))
    print(
        f"phase2[{cfg.phase2.engine}]: {len(front)} front solutions in corridor "
        f"[{corridor.light_nonzeros}, {corridor.heavy_nonzeros}]"
    )
    _update_manifest(
        cfg,
        {"p2": "p2.csv", "p2_masks": "p2_masks.txt", "p2_trace": "p2_trace.csv"},
        {"phase2": time.time() - t0},
    )
    return paths["p2"]


def cmd_report(cfg: RunConfig) -> Path:
    """Merge the fronts, compute the summary numbers, and emit the plot."""
    t0 = time.time()
    paths = _paths(cfg)
    p1_front, p1_meta = phase1.load_phase1(paths["p1"])
    p2_front, p2_meta = phase2.load_phase2(paths["p2"], paths["p2_masks"])
    ref1 = p1_meta.get("baseline_nonzeros")
    ref2 = p2_meta.get("baseline_nonzeros")
    if ref1 is None or ref2 is None or ref1 != ref2:
        raise ConfigError(
            f"normalization mismatch: p1 baseline_nonzeros={ref1}, p2 baseline_nonzeros={ref2}"
        )
    norm = NormalizationSpec(f1_ref=int(ref1))
    if "light_f1" in p2_meta and "light_f2" in p2_meta:
        light_obj = (float(p2_meta["light_f1"]), float(p2_meta["light_f2"]))
    else:
        light_obj = None
    if light_obj is not None:
        report = dominance_report(p1_front, p2_front, light_obj, norm)
        merged = merge_fronts(p1_front, p2_front, norm)
    else:
        merged = merge_fronts(p1_front, p2_front, norm)
        report = None

    summary = {
        "format_version": 1,
        "seed": cfg.seed,
        "engine": p2_meta.get("engine", ""),
        "normalization_f1_ref": int(ref1),
        "phase1_hv": hypervolume2([s.objectives for s in p1_front.solutions], norm),
        "phase2_pareto_solutions": len(p2_front.solutions),
        "phase2_dominating_light_anchor": report.phase2_dominating_light if report else 0,
        "phase2_dominating_and_surviving_merge": report.phase2_dominating_and_merged
        if report
        else 0,
        "final_hv": hypervolume2([s.objectives for s in merged.solutions], norm),
    }
    summary["hv_delta"] = summary["final_hv"] - summary["phase1_hv"]
    with open(paths["summary"], "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    anchors = {}
    if "heavy_f1" in p2_meta and "heavy_f2" in p2_meta:
        anchors["heavy"] = (float(p2_meta["heavy_f1"]), float(p2_meta["heavy_f2"]))
    if light_obj is not None:
        anchors["light"] = light_obj
    write_front_svg(
        paths["plot"],
        [s.objectives for s in p1_front.solutions],
        [s.objectives for s in p2_front.solutions],
        [s.objectives for s in merged.solutions],
        anchors,
        title="Nonzero weights vs error: coarse and refined fronts",
    )
    print(
        "report: phase1 HV {phase1_hv:.4f} -> final HV {final_hv:.4f} "
        "(+{hv_delta:.4f}); {phase2_pareto_solutions} refined solutions, "
        "{phase2_dominating_light_anchor} dominate the light anchor".format(**summary)
    )
    _update_manifest(
        cfg, {"summary": "summary.json", "plot": "front.svg"}, {"report": time.time() - t0}
    )
    return paths["summary"]


def cmd_pipeline(cfg: RunConfig) -> Path:
    """All stages in order under one master seed."""
    stages = [
        ("train", cmd_train),
        ("phase1", cmd_phase1),
        ("phase2", cmd_phase2),
        ("report", cmd_report),
    ]
    t0 = time.time()
    for name, fn in stages:
        try:
            fn(cfg)
        except Exception as exc:
            print(f"pipeline aborted at stage {name}: {exc}", file=sys.stderr)
            raise
    print(f"pipeline complete in {time.time() - t0:.1f}s; manifest at "
          f"{_paths(cfg)['manifest']}")
    return _paths(cfg)["manifest"]


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON run configuration (defaults used if omitted)")
    sub.add_argument("--out", help="output directory override")
    sub.add_argument("--seed", type=int, help="master seed override")
    sub.add_argument("--jobs", type=int, help="parallel fitness evaluation threads")
    sub.add_argument(
        "--engine", choices=["nsga2", "moead"], help="phase-2 engine override"
    )
    sub.add_argument(
        "--anchors",
        help="explicit anchor override 'HEAVY,LIGHT' (indices into the f1-sorted coarse front)",
    )


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.engine is not None:
        cfg.phase2.engine = args.engine
    if args.anchors is not None:
        try:
            hi, li = (int(v) for v in args.anchors.split(","))
        except ValueError as exc:
            raise ConfigError(f"--anchors expects 'HEAVY,LIGHT' integers: {args.anchors!r}") from exc
        cfg.anchor.override = (hi, li)
    cfg.validate()
    return cfg


COMMANDS = {
    "train": cmd_train,
    "phase1": cmd_phase1,
    "phase2": cmd_phase2,
    "report": cmd_report,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="evoprune",
        description="Two-phase multi-objective evolutionary pruning pipeline",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(subparsers.add_parser(name))
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        COMMANDS[args.command](cfg)
    except (ConfigError, InvalidSpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, ShapeError, EmptyDataError, OSError) as exc:
        print(f"data/format error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        AnchorSelectionError,
        CorridorError,
        InvalidIntervalError,
        ContractViolationError,
        DegenerateLayerError,
        EvoPruneError,
    ) as exc:
        print(f"optimization error: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
