"""Shared containers for Pareto fronts and their member solutions."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np


@dataclass
class FrontSolution:
    """One non-dominated solution: genome payload plus its objective pair.

    f1 is the nonzero-weight count (minimized), f2 the classification
    error on the evaluation subset (minimized). f2_val is filled in when a
    front is re-scored on the validation subset.
    """

    genome: np.ndarray
    f1: float
    f2: float
    phase: str = ""
    generation: int = -1
    f2_val: float | None = None

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f1, self.f2)


def _now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


@dataclass
class ParetoFront:
    """Set of mutually non-dominated solutions with run provenance.

    The creation timestamp is informational only; numeric exports never
    include it so that identical seeds reproduce identical files.
    """

    solutions: list[FrontSolution]
    seed: int
    phase: str
    created: str = field(default_factory=_now_iso)

    def __len__(self) -> int:
        return len(self.solutions)

    def sorted_by_f1(self) -> list[FrontSolution]:
        return sorted(self.solutions, key=lambda s: (s.f1, s.f2))

    def objective_array(self) -> np.ndarray:
        return np.array([[s.f1, s.f2] for s in self.solutions], dtype=np.float64).reshape(
            -1, 2
        )
