"""Coarse global pruning: evolve a (th1, th2) interval whose covered
weight values are zeroed, minimizing (nonzero count, error).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .datasets import LabeledSet
from .errors import ConfigError, EmptyDataError, InvalidSpecError
from .fronts import FrontSolution, ParetoFront
from .moea import EAConfig, Problem, TraceRow, moead_run, nsga2_run
from .network import Network, accuracy, apply_threshold, nonzero_count, prunable_weight_bounds
from .textio import FRONT_FORMAT, fmt, read_records, require_format, write_records

P1_HEADER = ["th1", "th2", "f1_raw", "f2_opt", "f2_val", "seed"]


def make_phase1_problem(base: Network, eval_set: LabeledSet) -> Problem:
    """Continuous 2-gene problem over the base model's weight value range.

    Genomes are repaired by sorting the pair before evaluation; the base
    network is never mutated.
    """
    if len(eval_set) == 0:
        raise EmptyDataError("phase 1 needs a non-empty evaluation set")
    if nonzero_count(base) == 0:
        raise InvalidSpecError("base network has no nonzero prunable weights")
    w_min, w_max = prunable_weight_bounds(base)

    def evaluate(genome: np.ndarray) -> tuple[float, float]:
        th1, th2 = sorted((float(genome[0]), float(genome[1])))
        pruned = apply_threshold(base, th1, th2)
        return (float(nonzero_count(pruned)), 1.0 - accuracy(pruned, eval_set))

    return Problem(
        kind="continuous",
        length=2,
        evaluate=evaluate,
        lower=np.array([w_min, w_min]),
        upper=np.array([w_max, w_max]),
        name="phase1",
    )


def run_phase1(
    base: Network,
    eval_set: LabeledSet,
    cfg: EAConfig,
    engine: str = "nsga2",
    jobs: int = 1,
    trace: list[TraceRow] | None = None,
) -> ParetoFront:
    """Evolve threshold pairs; the returned front stores repaired genomes."""
    problem = make_phase1_problem(base, eval_set)
    if engine == "nsga2":
        front = nsga2_run(problem, cfg, jobs=jobs, trace=trace)
    elif engine == "moead":
        front = moead_run(problem, cfg, jobs=jobs, trace=trace)
    else:
        raise ConfigError(f"unknown engine {engine!r} (expected 'nsga2' or 'moead')")
    for sol in front.solutions:
        sol.genome = np.sort(sol.genome)
    return front


def rescore_phase1(front: ParetoFront, base: Network, val_set: LabeledSet) -> None:
    """Fill each solution's f2_val with its error on the validation set."""
    for sol in front.solutions:
        pruned = apply_threshold(base, float(sol.genome[0]), float(sol.genome[1]))
        sol.f2_val = 1.0 - accuracy(pruned, val_set)


def export_phase1(
    front: ParetoFront,
    path: str | Path,
    baseline_nonzeros: int,
    engine: str,
    eval_subset: str = "opt",
) -> None:
    meta = {
        "format": FRONT_FORMAT,
        "phase": "phase1",
        "engine": engine,
        "seed": front.seed,
        "baseline_nonzeros": baseline_nonzeros,
        "eval_subset": eval_subset,
    }
    rows = []
    for sol in front.sorted_by_f1():
        rows.append(
            [
                fmt(sol.genome[0]),
                fmt(sol.genome[1]),
                int(sol.f1),
                fmt(sol.f2),
                fmt(sol.f2_val) if sol.f2_val is not None else "",
                front.seed,
            ]
        )
    write_records(path, meta, P1_HEADER, rows)


def load_phase1(path: str | Path) -> tuple[ParetoFront, dict[str, str]]:
    meta, header, rows = read_records(path)
    require_format(meta, FRONT_FORMAT, path)
    if header != P1_HEADER:
        raise ConfigError(f"{path}: unexpected columns {header}")
    solutions = []
    for row in rows:
        sol = FrontSolution(
            genome=np.array([float(row[0]), float(row[1])]),
            f1=float(row[2]),
            f2=float(row[3]),
            phase="phase1",
            f2_val=float(row[4]) if row[4] else None,
        )
        solutions.append(sol)
    seed = int(meta.get("seed", 0))
    return ParetoFront(solutions, seed=seed, phase="phase1"), meta
