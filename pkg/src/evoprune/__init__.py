"""Two-phase multi-objective evolutionary pruning for dense networks.

Phase 1 evolves a continuous threshold interval that zeroes weights by
value; Phase 2 refines binary masks over the surviving weights between
two anchor models, seeded by importance-guided sampling. Both phases
minimize (nonzero weight count, classification error) with NSGA-II or
MOEA/D and report Pareto-front hypervolume gains.
"""

from .datasets import LabeledSet, SplitSpec, generate_blobs, stratified_split
from .fronts import FrontSolution, ParetoFront
from .moea import EAConfig, Problem, moead_run, nsga2_run
from .network import (
    Layer,
    Network,
    TrainConfig,
    accuracy,
    apply_mask,
    apply_threshold,
    forward,
    init_network,
    load_checkpoint,
    nonzero_count,
    save_checkpoint,
    train,
)
from .pareto import NormalizationSpec, dominance_report, hypervolume2, merge_fronts, pareto_filter

__all__ = [
    "EAConfig",
    "FrontSolution",
    "LabeledSet",
    "Layer",
    "Network",
    "NormalizationSpec",
    "ParetoFront",
    "Problem",
    "SplitSpec",
    "TrainConfig",
    "accuracy",
    "apply_mask",
    "apply_threshold",
    "dominance_report",
    "forward",
    "generate_blobs",
    "hypervolume2",
    "init_network",
    "load_checkpoint",
    "merge_fronts",
    "moead_run",
    "nonzero_count",
    "nsga2_run",
    "pareto_filter",
    "save_checkpoint",
    "stratified_split",
    "train",
]
