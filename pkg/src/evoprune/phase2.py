"""Importance-guided binary refinement between two anchor models.

Anchors picked from the coarse front bound a nonzero-count corridor
[N_l, N_h]; the corridor is split into bins and each bin seeds masks via
importance-aware Bernoulli sampling, normalized to an exact per-mask
retention target. The masks then evolve under NSGA-II or MOEA/D against
the heavy anchor model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .datasets import LabeledSet
from .errors import (
    AnchorSelectionError,
    ConfigError,
    CorridorError,
    DegenerateLayerError,
    EmptyDataError,
    InvalidSpecError,
)
from .fronts import FrontSolution, ParetoFront
from .moea import EAConfig, Problem, TraceRow, moead_run, nsga2_run, stream
from .network import Layer, Network, accuracy, apply_mask, apply_threshold, nonzero_count
from .textio import (
    FRONT_FORMAT,
    MASKS_FORMAT,
    decode_bits_rle,
    encode_bits_rle,
    fmt,
    read_records,
    require_format,
    write_records,
)

log = logging.getLogger(__name__)

P2_HEADER = ["mask_id", "f1", "f2_opt", "f2_val", "popcount", "pruned_pct", "engine", "seed"]


@dataclass
class AnchorRule:
    """Default anchor picks: heavy = most weights within delta_acc of the
    best error, light = fewest weights within delta_loss of it. An explicit
    (heavy_index, light_index) override bypasses the rule entirely."""

    delta_acc: float = 0.01
    delta_loss: float = 0.05
    override: tuple[int, int] | None = None


@dataclass
class Corridor:
    heavy: Network
    heavy_nonzeros: int
    light_nonzeros: int
    bins: int
    per_bin: int


@dataclass
class ImportanceInitConfig:
    sparsity_threshold: float = 0.05
    excluded_layers: frozenset[str] | None = None  # None: first prunable layer
    lambda_lo: float = 0.2
    lambda_hi: float = 0.6
    lambda_overrides: dict[str, tuple[float, float]] = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.sparsity_threshold <= 1.0:
            raise InvalidSpecError("sparsity_threshold must be in [0, 1]")
        for lo, hi in [(self.lambda_lo, self.lambda_hi), *self.lambda_overrides.values()]:
            if not 0.0 <= lo <= hi <= 1.0:
                raise InvalidSpecError(f"lambda range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")

    def lambda_range(self, layer_name: str) -> tuple[float, float]:
        return self.lambda_overrides.get(layer_name, (self.lambda_lo, self.lambda_hi))


def resolve_excluded(icfg: ImportanceInitConfig, net: Network) -> ImportanceInitConfig:
    """Concretize the default exclusion set as the first prunable layer."""
    if icfg.excluded_layers is not None:
        return icfg
    first = next((l.name for l in net.layers if l.prunable), None)
    excluded = frozenset([first]) if first else frozenset()
    return replace(icfg, excluded_layers=excluded)


# ---------------------------------------------------------------------------
# anchors and corridor


def select_anchors(
    front: ParetoFront, rule: AnchorRule
) -> tuple[FrontSolution, FrontSolution]:
    """(heavy, light) anchor pair; indices refer to the front sorted by f1."""
    sols = front.sorted_by_f1()
    if rule.override is not None:
        hi, li = rule.override
        for idx in (hi, li):
            if not 0 <= idx < len(sols):
                raise AnchorSelectionError(
                    f"override index {idx} out of range for a front of {len(sols)} solutions"
                )
        return sols[hi], sols[li]
    if len(sols) < 2:
        raise AnchorSelectionError(f"need at least 2 solutions to pick anchors, got {len(sols)}")
    errs = [s.f2_val if s.f2_val is not None else s.f2 for s in sols]
    if len(sols) == 2:
        # forced choice: the lower-error solution is the heavy anchor
        heavy, light = (sols[0], sols[1]) if errs[0] <= errs[1] else (sols[1], sols[0])
        if heavy.f1 <= light.f1:
            raise AnchorSelectionError(
                "two-solution front has its lower-error point at the smaller "
                f"nonzero count (f1={heavy.f1:.0f} vs {light.f1:.0f}); no valid corridor"
            )
        return heavy, light
    # the deltas apply to validation re-scores when available; on a
    # validation-rescored front the least-pruned solutions are usually NOT
    # the most accurate ones, which is what pushes the heavy anchor into
    # genuinely pruned territory
    best = min(errs)
    heavy_cands = [s for s, e in zip(sols, errs) if e <= best + rule.delta_acc]
    light_cands = [s for s, e in zip(sols, errs) if e <= best + rule.delta_loss]
    heavy = max(heavy_cands, key=lambda s: s.f1)
    light = min(light_cands, key=lambda s: s.f1)
    if heavy.f1 <= light.f1:
        listing = "\n".join(
            f"  [{i}] f1={s.f1:.0f} f2={s.f2:.6f} f2_val={s.f2_val}" for i, s in enumerate(sols)
        )
        raise AnchorSelectionError(
            "anchor rule found no pair with heavy f1 > light f1 "
            f"(delta_acc={rule.delta_acc}, delta_loss={rule.delta_loss}); front:\n{listing}"
        )
    return heavy, light


def build_corridor(
    base: Network,
    heavy_sol: FrontSolution,
    light_sol: FrontSolution,
    bins: int,
    population: int,
) -> Corridor:
    """Materialize the heavy anchor network and the [N_l, N_h] interval."""
    if bins < 1:
        raise InvalidSpecError(f"bins must be >= 1, got {bins}")
    if population % bins != 0:
        raise InvalidSpecError(
            f"population {population} must be divisible by bins {bins}"
        )
    th1, th2 = sorted((float(heavy_sol.genome[0]), float(heavy_sol.genome[1])))
    heavy_net = apply_threshold(base, th1, th2)
    n_h = nonzero_count(heavy_net)
    n_l = int(round(light_sol.f1))
    if n_l >= n_h:
        raise CorridorError(f"light anchor N_l={n_l} must be below heavy N_h={n_h}")
    return Corridor(
        heavy=heavy_net,
        heavy_nonzeros=n_h,
        light_nonzeros=n_l,
        bins=bins,
        per_bin=population // bins,
    )


# ---------------------------------------------------------------------------
# importance-guided initialization


def importance_scores(net: Network) -> dict[str, np.ndarray]:
    """Per prunable layer: |w| / max |w| for each nonzero weight, in the
    layer's row-major nonzero order; the layer maximum scores exactly 1."""
    scores: dict[str, np.ndarray] = {}
    for layer in net.layers:
        if not layer.prunable:
            continue
        flat = np.abs(layer.weights.ravel())
        nz = flat[flat > 0.0]
        if len(nz) == 0:
            raise DegenerateLayerError(f"layer {layer.name!r} has no nonzero weights")
        scores[layer.name] = nz / nz.max()
    return scores


def layer_sparsity(layer: Layer) -> float:
    return 1.0 - np.count_nonzero(layer.weights) / layer.weights.size


def layer_lambda(layer: Layer, icfg: ImportanceInitConfig, rng) -> float:
    """Pruning intensity for one layer: 0 for excluded or still-dense
    layers, otherwise a uniform draw from the layer's lambda range."""
    if icfg.excluded_layers and layer.name in icfg.excluded_layers:
        return 0.0
    if layer_sparsity(layer) < icfg.sparsity_threshold:
        return 0.0
    lo, hi = icfg.lambda_range(layer.name)
    return float(rng.uniform(lo, hi))


def sample_mask_bits(scores: np.ndarray, lam: float, rng) -> np.ndarray:
    """Bernoulli retention draw: bit j is 1 with probability 1 - lam*(1 - s_j)."""
    p_prune = lam * (1.0 - scores)
    return (rng.random(len(scores)) >= p_prune).astype(np.uint8)


@dataclass
class MaskLayout:
    """Canonical bit layout over the heavy model's nonzero prunable weights."""

    importance: np.ndarray  # per-bit score in (0, 1]
    forced: np.ndarray  # per-bit bool: bit must stay 1 during init
    segments: list[tuple[Layer, slice]]  # prunable layers with nonzero weights

    @property
    def n_bits(self) -> int:
        return len(self.importance)


def build_mask_layout(heavy: Network, icfg: ImportanceInitConfig) -> MaskLayout:
    icfg = resolve_excluded(icfg, heavy)
    segments: list[tuple[Layer, slice]] = []
    importance_parts: list[np.ndarray] = []
    forced_parts: list[np.ndarray] = []
    pos = 0
    for layer in heavy.layers:
        if not layer.prunable:
            continue
        flat = np.abs(layer.weights.ravel())
        nz = flat[flat > 0.0]
        if len(nz) == 0:
            continue  # fully pruned layer holds no mask positions
        seg = slice(pos, pos + len(nz))
        pos += len(nz)
        segments.append((layer, seg))
        importance_parts.append(nz / nz.max())
        protected = (layer.name in icfg.excluded_layers) or (
            layer_sparsity(layer) < icfg.sparsity_threshold
        )
        forced_parts.append(np.full(len(nz), protected))
    if pos == 0:
        raise DegenerateLayerError("heavy model has no nonzero prunable weights")
    return MaskLayout(
        importance=np.concatenate(importance_parts),
        forced=np.concatenate(forced_parts),
        segments=segments,
    )


def normalize_mask(bits: np.ndarray, k: int, layout: MaskLayout) -> None:
    """In place, force popcount to exactly k: drop the lowest-importance
    retained bits or restore the highest-importance pruned ones. Forced
    bits are never dropped, so the reachable minimum is the forced count."""
    popcount = int(bits.sum())
    if popcount > k:
        droppable = np.flatnonzero((bits == 1) & ~layout.forced)
        order = droppable[np.argsort(layout.importance[droppable], kind="stable")]
        bits[order[: min(popcount - k, len(order))]] = 0
    elif popcount < k:
        restorable = np.flatnonzero(bits == 0)
        order = restorable[np.argsort(-layout.importance[restorable], kind="stable")]
        bits[order[: k - popcount]] = 1


def smart_init(corridor: Corridor, icfg: ImportanceInitConfig) -> list[np.ndarray]:
    """Importance-guided initial population covering every corridor bin.

    Per individual: draw a retention target K uniformly inside its bin,
    Bernoulli-sample bits from the layer-wise pruning probabilities, then
    normalize to exactly K retained bits.
    """
    icfg = resolve_excluded(icfg, corridor.heavy)
    icfg.validate()
    layout = build_mask_layout(corridor.heavy, icfg)
    if layout.n_bits != corridor.heavy_nonzeros:
        raise CorridorError(
            f"mask universe {layout.n_bits} != heavy nonzero count {corridor.heavy_nonzeros}"
        )
    forced_count = int(layout.forced.sum())
    edges = np.linspace(corridor.light_nonzeros, corridor.heavy_nonzeros, corridor.bins + 1)
    if forced_count > corridor.light_nonzeros:
        log.warning(
            "forced-1 bits (%d) exceed the corridor floor (%d); affected targets "
            "rise to the minimum feasible count",
            forced_count,
            corridor.light_nonzeros,
        )
    population: list[np.ndarray] = []
    for b in range(corridor.bins):
        k_lo, k_hi = int(np.ceil(edges[b])), int(np.floor(edges[b + 1]))
        for j in range(corridor.per_bin):
            rng = stream(icfg.seed, b, j)
            k = int(rng.integers(k_lo, k_hi + 1)) if k_hi >= k_lo else int(round(edges[b]))
            bits = np.ones(layout.n_bits, dtype=np.uint8)
            for layer, seg in layout.segments:
                lam = layer_lambda(layer, icfg, rng)
                if lam > 0.0:
                    bits[seg] = sample_mask_bits(layout.importance[seg], lam, rng)
            normalize_mask(bits, max(k, forced_count), layout)
            population.append(bits)
    return population


# ---------------------------------------------------------------------------
# evolution


def make_phase2_problem(
    heavy: Network, eval_set: LabeledSet, bit_flip_bias: np.ndarray | None = None
) -> Problem:
    """Binary mask problem over the heavy anchor; the anchor never mutates."""
    if len(eval_set) == 0:
        raise EmptyDataError("phase 2 needs a non-empty evaluation set")
    n_r = nonzero_count(heavy)
    if n_r == 0:
        raise InvalidSpecError("heavy anchor has no nonzero prunable weights")

    def evaluate(bits: np.ndarray) -> tuple[float, float]:
        masked = apply_mask(heavy, bits)
        return (float(nonzero_count(masked)), 1.0 - accuracy(masked, eval_set))

    return Problem(
        kind="binary",
        length=n_r,
        evaluate=evaluate,
        name="phase2",
        bit_flip_bias=bit_flip_bias,
    )


def run_phase2(
    corridor: Corridor,
    eval_set: LabeledSet,
    cfg: EAConfig,
    icfg: ImportanceInitConfig,
    engine: str = "nsga2",
    jobs: int = 1,
    importance_bias_mutation: bool = False,
    trace: list[TraceRow] | None = None,
) -> ParetoFront:
    """Seed masks with smart_init and evolve them with the chosen engine."""
    if corridor.bins * corridor.per_bin != cfg.population:
        raise InvalidSpecError(
            f"corridor bins*per_bin = {corridor.bins * corridor.per_bin} "
            f"must equal population {cfg.population}"
        )
    bias = None
    if importance_bias_mutation:
        layout = build_mask_layout(corridor.heavy, icfg)
        bias = 1.0 - layout.importance
    problem = make_phase2_problem(corridor.heavy, eval_set, bit_flip_bias=bias)
    problem.initializer = lambda n, rng: smart_init(corridor, icfg)
    if engine == "nsga2":
        return nsga2_run(problem, cfg, jobs=jobs, trace=trace)
    if engine == "moead":
        return moead_run(problem, cfg, jobs=jobs, trace=trace)
    raise ConfigError(f"unknown engine {engine!r} (expected 'nsga2' or 'moead')")


def rescore_phase2(front: ParetoFront, heavy: Network, val_set: LabeledSet) -> None:
    for sol in front.solutions:
        masked = apply_mask(heavy, sol.genome)
        sol.f2_val = 1.0 - accuracy(masked, val_set)


# ---------------------------------------------------------------------------
# artifacts


def export_phase2(
    front: ParetoFront,
    path: str | Path,
    masks_path: str | Path,
    baseline_nonzeros: int,
    engine: str,
    heavy_sol: FrontSolution,
    light_sol: FrontSolution,
    eval_subset: str = "opt",
) -> None:
    """Front CSV plus a run-length-encoded mask sidecar, aligned by mask_id.

    The heavy anchor's threshold pair is recorded so the anchor network
    (and thus every mask's objectives) can be rebuilt from the checkpoint.
    """
    meta = {
        "format": FRONT_FORMAT,
        "phase": "phase2",
        "engine": engine,
        "seed": front.seed,
        "baseline_nonzeros": baseline_nonzeros,
        "eval_subset": eval_subset,
        "heavy_th1": fmt(heavy_sol.genome[0]),
        "heavy_th2": fmt(heavy_sol.genome[1]),
        "heavy_f1": int(heavy_sol.f1),
        "heavy_f2": fmt(heavy_sol.f2),
        "light_f1": int(light_sol.f1),
        "light_f2": fmt(light_sol.f2),
        "masks_file": Path(masks_path).name,
    }
    sols = front.sorted_by_f1()
    rows = []
    mask_rows = []
    for i, sol in enumerate(sols):
        popcount = int(np.asarray(sol.genome).sum())
        rows.append(
            [
                i,
                int(sol.f1),
                fmt(sol.f2),
                fmt(sol.f2_val) if sol.f2_val is not None else "",
                popcount,
                fmt(1.0 - sol.f1 / baseline_nonzeros),
                engine,
                front.seed,
            ]
        )
        mask_rows.append([i, encode_bits_rle(sol.genome)])
    write_records(path, meta, P2_HEADER, rows)
    mask_meta = {
        "format": MASKS_FORMAT,
        "length": len(sols[0].genome) if sols else 0,
        "seed": front.seed,
    }
    write_records(masks_path, mask_meta, ["mask_id", "rle"], mask_rows)


def load_phase2(
    path: str | Path, masks_path: str | Path | None = None
) -> tuple[ParetoFront, dict[str, str]]:
    """Read the phase-2 CSV; masks are attached when the sidecar is given."""
    meta, header, rows = read_records(path)
    require_format(meta, FRONT_FORMAT, path)
    if header != P2_HEADER:
        raise ConfigError(f"{path}: unexpected columns {header}")
    masks: dict[int, np.ndarray] = {}
    if masks_path is not None:
        m_meta, m_header, m_rows = read_records(masks_path)
        require_format(m_meta, MASKS_FORMAT, masks_path)
        length = int(m_meta["length"])
        for row in m_rows:
            masks[int(row[0])] = decode_bits_rle(row[1], length)
    solutions = []
    for row in rows:
        mask_id = int(row[0])
        genome = masks.get(mask_id, np.empty(0, dtype=np.uint8))
        solutions.append(
            FrontSolution(
                genome=genome,
                f1=float(row[1]),
                f2=float(row[2]),
                phase="phase2",
                f2_val=float(row[3]) if row[3] else None,
            )
        )
    return ParetoFront(solutions, seed=int(meta.get("seed", 0)), phase="phase2"), meta
