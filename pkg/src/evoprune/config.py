"""Run configuration: defaults, JSON loading with strict key checking,
and master-seed derivation for every pipeline stage.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .datasets import SplitSpec
from .errors import ConfigError
from .moea import EAConfig
from .network import TrainConfig
from .phase2 import AnchorRule, ImportanceInitConfig

CONFIG_VERSION = 1

DEFAULT_WIDTHS = [8, 32, 64, 128, 96, 4]


@dataclass
class DatasetConfig:
    classes: int = 4
    dim: int = 8
    per_class: int = 400
    spread: float = 1.0


@dataclass
class PhaseConfig:
    ea: EAConfig
    engine: str = "nsga2"
    eval_subset: str = "opt"  # "opt" | "val"

    def validate(self) -> None:
        if self.engine not in ("nsga2", "moead"):
            raise ConfigError(f"engine must be 'nsga2' or 'moead', got {self.engine!r}")
        if self.eval_subset not in ("opt", "val"):
            raise ConfigError(f"eval_subset must be 'opt' or 'val', got {self.eval_subset!r}")


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "run_out"
    jobs: int = 1
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    widths: list[int] = field(default_factory=lambda: list(DEFAULT_WIDTHS))
    first_layer_prunable: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    phase1: PhaseConfig = field(
        default_factory=lambda: PhaseConfig(ea=EAConfig(mutation_prob=0.2))
    )
    phase2: PhaseConfig = field(
        default_factory=lambda: PhaseConfig(ea=EAConfig(mutation_prob=0.05))
    )
    bins: int = 5
    importance: ImportanceInitConfig = field(default_factory=ImportanceInitConfig)
    anchor: AnchorRule = field(default_factory=AnchorRule)
    importance_bias_mutation: bool = False

    def validate(self) -> None:
        self.phase1.validate()
        self.phase2.validate()
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")


def derive_stage_seeds(master: int) -> dict[str, int]:
    """Deterministic per-stage seeds; the master seed fully determines a run."""
    state = np.random.SeedSequence(master & 0xFFFFFFFFFFFFFFFF).generate_state(7)
    names = ["data", "split", "network", "train", "phase1", "phase2", "importance"]
    return {name: int(v) for name, v in zip(names, state)}


def default_config() -> RunConfig:
    return RunConfig()


# ---------------------------------------------------------------------------
# JSON round trip


def config_to_dict(cfg: RunConfig) -> dict:
    anchor_override = list(cfg.anchor.override) if cfg.anchor.override else None
    return {
        "version": CONFIG_VERSION,
        "seed": cfg.seed,
        "out_dir": cfg.out_dir,
        "jobs": cfg.jobs,
        "dataset": asdict(cfg.dataset),
        "split": {
            "train_fraction": cfg.split.train_fraction,
            "val_fraction": cfg.split.val_fraction,
            "opt_per_class": cfg.split.opt_per_class,
        },
        "network": {
            "widths": list(cfg.widths),
            "first_layer_prunable": cfg.first_layer_prunable,
        },
        "train": {
            "epochs": cfg.train.epochs,
            "learning_rate": cfg.train.learning_rate,
            "batch_size": cfg.train.batch_size,
            "beta1": cfg.train.beta1,
            "beta2": cfg.train.beta2,
            "epsilon": cfg.train.epsilon,
        },
        "phase1": {
            "engine": cfg.phase1.engine,
            "eval_subset": cfg.phase1.eval_subset,
            "population": cfg.phase1.ea.population,
            "generations": cfg.phase1.ea.generations,
            "crossover_prob": cfg.phase1.ea.crossover_prob,
            "mutation_prob": cfg.phase1.ea.mutation_prob,
            "sbx_eta": cfg.phase1.ea.sbx_eta,
            "poly_eta": cfg.phase1.ea.poly_eta,
        },
        "phase2": {
            "engine": cfg.phase2.engine,
            "eval_subset": cfg.phase2.eval_subset,
            "population": cfg.phase2.ea.population,
            "generations": cfg.phase2.ea.generations,
            "crossover_prob": cfg.phase2.ea.crossover_prob,
            "mutation_prob": cfg.phase2.ea.mutation_prob,
            "moead_neighbors": cfg.phase2.ea.moead_neighbors,
            "moead_mating_prob": cfg.phase2.ea.moead_mating_prob,
            "moead_binary_proxy": cfg.phase2.ea.moead_binary_proxy,
            "bins": cfg.bins,
            "importance_bias_mutation": cfg.importance_bias_mutation,
        },
        "importance_init": {
            "sparsity_threshold": cfg.importance.sparsity_threshold,
            "excluded_layers": sorted(cfg.importance.excluded_layers)
            if cfg.importance.excluded_layers is not None
            else None,
            "lambda_lo": cfg.importance.lambda_lo,
            "lambda_hi": cfg.importance.lambda_hi,
            "lambda_overrides": {
                k: list(v) for k, v in cfg.importance.lambda_overrides.items()
            },
        },
        "anchors": {
            "delta_acc": cfg.anchor.delta_acc,
            "delta_loss": cfg.anchor.delta_loss,
            "override": anchor_override,
        },
    }


def _take(section: dict, path: str, allowed: set[str]) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {path}: {sorted(unknown)}")


def config_from_dict(data: dict, source: str = "config") -> RunConfig:
    """Build a RunConfig from parsed JSON; unknown keys are hard errors."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    _take(
        data,
        source,
        {
            "version", "seed", "out_dir", "jobs", "dataset", "split", "network",
            "train", "phase1", "phase2", "importance_init", "anchors",
        },
    )
    version = data.get("version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"{source}: version {version!r}, expected {CONFIG_VERSION}")
    cfg = default_config()
    cfg.seed = int(data.get("seed", cfg.seed))
    cfg.out_dir = str(data.get("out_dir", cfg.out_dir))
    cfg.jobs = int(data.get("jobs", cfg.jobs))

    ds = data.get("dataset", {})
    _take(ds, f"{source}.dataset", {"classes", "dim", "per_class", "spread"})
    cfg.dataset = DatasetConfig(
        classes=int(ds.get("classes", cfg.dataset.classes)),
        dim=int(ds.get("dim", cfg.dataset.dim)),
        per_class=int(ds.get("per_class", cfg.dataset.per_class)),
        spread=float(ds.get("spread", cfg.dataset.spread)),
    )

    sp = data.get("split", {})
    _take(sp, f"{source}.split", {"train_fraction", "val_fraction", "opt_per_class"})
    cfg.split = SplitSpec(
        train_fraction=float(sp.get("train_fraction", cfg.split.train_fraction)),
        val_fraction=float(sp.get("val_fraction", cfg.split.val_fraction)),
        opt_per_class=int(sp.get("opt_per_class", cfg.split.opt_per_class)),
    )

    net = data.get("network", {})
    _take(net, f"{source}.network", {"widths", "first_layer_prunable"})
    cfg.widths = [int(w) for w in net.get("widths", cfg.widths)]
    cfg.first_layer_prunable = bool(net.get("first_layer_prunable", cfg.first_layer_prunable))

    tr = data.get("train", {})
    _take(
        tr,
        f"{source}.train",
        {"epochs", "learning_rate", "batch_size", "beta1", "beta2", "epsilon"},
    )
    cfg.train = TrainConfig(
        epochs=int(tr.get("epochs", cfg.train.epochs)),
        learning_rate=float(tr.get("learning_rate", cfg.train.learning_rate)),
        batch_size=int(tr.get("batch_size", cfg.train.batch_size)),
        beta1=float(tr.get("beta1", cfg.train.beta1)),
        beta2=float(tr.get("beta2", cfg.train.beta2)),
        epsilon=float(tr.get("epsilon", cfg.train.epsilon)),
    )

    def phase(section_name: str, base: PhaseConfig, extra: set[str]) -> tuple[PhaseConfig, dict]:
        ph = data.get(section_name, {})
        allowed = {
            "engine", "eval_subset", "population", "generations", "crossover_prob",
            "mutation_prob", "sbx_eta", "poly_eta", "moead_neighbors",
            "moead_mating_prob", "moead_binary_proxy",
        } | extra
        _take(ph, f"{source}.{section_name}", allowed)
        ea = base.ea
        new_ea = EAConfig(
            population=int(ph.get("population", ea.population)),
            generations=int(ph.get("generations", ea.generations)),
            crossover_prob=float(ph.get("crossover_prob", ea.crossover_prob)),
            mutation_prob=float(ph.get("mutation_prob", ea.mutation_prob)),
            sbx_eta=float(ph.get("sbx_eta", ea.sbx_eta)),
            poly_eta=float(ph.get("poly_eta", ea.poly_eta)),
            moead_neighbors=int(ph.get("moead_neighbors", ea.moead_neighbors)),
            moead_mating_prob=float(ph.get("moead_mating_prob", ea.moead_mating_prob)),
            moead_binary_proxy=bool(ph.get("moead_binary_proxy", ea.moead_binary_proxy)),
        )
        return (
            PhaseConfig(
                ea=new_ea,
                engine=str(ph.get("engine", base.engine)),
                eval_subset=str(ph.get("eval_subset", base.eval_subset)),
            ),
            ph,
        )

    cfg.phase1, _ = phase("phase1", cfg.phase1, set())
    cfg.phase2, ph2 = phase("phase2", cfg.phase2, {"bins", "importance_bias_mutation"})
    cfg.bins = int(ph2.get("bins", cfg.bins))
    cfg.importance_bias_mutation = bool(
        ph2.get("importance_bias_mutation", cfg.importance_bias_mutation)
    )

    imp = data.get("importance_init", {})
    _take(
        imp,
        f"{source}.importance_init",
        {"sparsity_threshold", "excluded_layers", "lambda_lo", "lambda_hi", "lambda_overrides"},
    )
    excluded = imp.get("excluded_layers", None)
    cfg.importance = ImportanceInitConfig(
        sparsity_threshold=float(imp.get("sparsity_threshold", cfg.importance.sparsity_threshold)),
        excluded_layers=frozenset(excluded) if excluded is not None else None,
        lambda_lo=float(imp.get("lambda_lo", cfg.importance.lambda_lo)),
        lambda_hi=float(imp.get("lambda_hi", cfg.importance.lambda_hi)),
        lambda_overrides={
            str(k): (float(v[0]), float(v[1]))
            for k, v in imp.get("lambda_overrides", {}).items()
        },
    )

    an = data.get("anchors", {})
    _take(an, f"{source}.anchors", {"delta_acc", "delta_loss", "override"})
    override = an.get("override", None)
    if override is not None:
        if len(override) != 2:
            raise ConfigError(f"{source}.anchors.override must be a pair of indices")
        override = (int(override[0]), int(override[1]))
    cfg.anchor = AnchorRule(
        delta_acc=float(an.get("delta_acc", cfg.anchor.delta_acc)),
        delta_loss=float(an.get("delta_loss", cfg.anchor.delta_loss)),
        override=override,
    )

    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data, source=str(path))


def save_config(cfg: RunConfig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
