"""Pareto-front analytics: dominance, front merging, 2-D hypervolume,
and the run summary combining both phases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fronts import ParetoFront

log = logging.getLogger(__name__)

Objectives = tuple[float, float]


@dataclass(frozen=True)
class NormalizationSpec:
    """Objective normalization shared by every front in a comparison.

    f1 divides by the baseline nonzero count, f2 is already an error rate
    in [0, 1]; the hypervolume reference point is (1, 1) in that space.
    """

    f1_ref: int

    def __post_init__(self) -> None:
        if self.f1_ref <= 0:
            raise ConfigError(f"f1_ref must be a positive count, got {self.f1_ref}")

    def normalize(self, point: Objectives) -> Objectives:
        return (point[0] / self.f1_ref, point[1])


def dominates(a: Objectives, b: Objectives) -> bool:
    """True iff a is no worse than b everywhere and strictly better somewhere."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def pareto_indices(points: list[Objectives]) -> list[int]:
    """Indices of the non-dominated subset, objective-duplicates collapsed.

    Sort-and-sweep: after ordering by (f1, f2), a point survives iff its
    f2 strictly improves on everything before it. Returned indices are in
    ascending (f1, f2) order; among duplicates the earliest index wins.
    """
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1], i))
    keep: list[int] = []
    best_f2 = np.inf
    for i in order:
        if points[i][1] < best_f2:
            keep.append(i)
            best_f2 = points[i][1]
    return keep


def pareto_filter(points: list[Objectives]) -> list[Objectives]:
    return [points[i] for i in pareto_indices(points)]


def merge_fronts(a: ParetoFront, b: ParetoFront, norm: NormalizationSpec) -> ParetoFront:
    """Non-dominated union of two fronts; per-solution provenance survives.

    Both fronts must live under the same NormalizationSpec; solutions with
    f1 above norm.f1_ref indicate a mismatched spec and are rejected.
    """
    union = list(a.solutions) + list(b.solutions)
    for sol in union:
        if sol.f1 > norm.f1_ref:
            raise ConfigError(
                f"front solution f1={sol.f1} exceeds f1_ref={norm.f1_ref}; "
                "fronts were built under a different normalization"
            )
    keep = pareto_indices([s.objectives for s in union])
    return ParetoFront([union[i] for i in keep], seed=a.seed, phase="merged")


def hypervolume2(points: list[Objectives], norm: NormalizationSpec) -> float:
    """Exact dominated area against reference (1, 1) in normalized space.

    Points outside the unit box are clipped with a warning; an empty front
    yields 0 with a warning.
    """
    if len(points) == 0:
        log.warning("hypervolume of an empty front is 0")
        return 0.0
    normed = []
    clipped = 0
    for p in points:
        x, y = norm.normalize(p)
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            clipped += 1
            x = min(max(x, 0.0), 1.0)
            y = min(max(y, 0.0), 1.0)
        normed.append((x, y))
    if clipped:
        log.warning("clipped %d point(s) outside the unit box before hypervolume", clipped)
    front = pareto_filter(normed)
    hv = 0.0
    for i, (x, y) in enumerate(front):
        next_x = front[i + 1][0] if i + 1 < len(front) else 1.0
        hv += (next_x - x) * (1.0 - y)
    return hv


@dataclass
class DominanceReport:
    """Headline numbers comparing the refined front against the coarse one."""

    phase2_count: int
    phase2_dominating_light: int
    phase2_dominating_and_merged: int
    phase1_hv: float
    merged_hv: float

    @property
    def hv_delta(self) -> float:
        return self.merged_hv - self.phase1_hv

    def as_dict(self) -> dict:
        return {
            "phase2_pareto_solutions": self.phase2_count,
            "phase2_dominating_light_anchor": self.phase2_dominating_light,
            "phase2_dominating_and_surviving_merge": self.phase2_dominating_and_merged,
            "phase1_hv": self.phase1_hv,
            "final_hv": self.merged_hv,
            "hv_delta": self.hv_delta,
        }


def dominance_report(
    p1: ParetoFront,
    p2: ParetoFront,
    light_anchor: Objectives,
    norm: NormalizationSpec,
) -> DominanceReport:
    """Count refined solutions beating the light anchor and measure HV gain.

    The merged-survivor count requires a refined solution to both strictly
    dominate the light anchor and stay non-dominated after merging with
    the coarse front (coarse solutions win objective ties).
    """
    merged = merge_fronts(p1, p2, norm)
    merged_ids = {id(s) for s in merged.solutions}
    dominating = [s for s in p2.solutions if dominates(s.objectives, light_anchor)]
    surviving = [s for s in dominating if id(s) in merged_ids]
    hv_p1 = hypervolume2([s.objectives for s in p1.solutions], norm)
    hv_merged = hypervolume2([s.objectives for s in merged.solutions], norm)
    return DominanceReport(
        phase2_count=len(p2.solutions),
        phase2_dominating_light=len(dominating),
        phase2_dominating_and_merged=len(surviving),
        phase1_hv=hv_p1,
        merged_hv=hv_merged,
    )
