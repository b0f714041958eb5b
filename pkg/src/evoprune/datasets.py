"""Synthetic labeled datasets and the stratified train/val/opt/test split.

The optimization subset is a small exactly-balanced slice used for cheap
fitness evaluation during evolutionary search; the validation subset is
reserved for re-scoring fronts and anchor selection.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidSpecError


@dataclass
class LabeledSet:
    features: np.ndarray  # (n, dim) float64
    labels: np.ndarray  # (n,) int64
    classes: int

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class SplitSpec:
    train_fraction: float = 0.6
    val_fraction: float = 0.2
    opt_per_class: int = 75
    seed: int = 0

    def validate(self) -> None:
        if self.train_fraction <= 0 or self.val_fraction <= 0:
            raise InvalidSpecError("split fractions must be positive")
        if self.train_fraction + self.val_fraction > 1.0:
            raise InvalidSpecError("train_fraction + val_fraction must be <= 1")
        if self.opt_per_class < 1:
            raise InvalidSpecError("opt_per_class must be >= 1")


def generate_blobs(
    classes: int, dim: int, per_class: int, spread: float, seed: int
) -> LabeledSet:
    """Balanced Gaussian clusters, standardized per dimension.

    Class means are drawn at random and pushed apart only if the closest
    pair sits under 4.5*spread, so shrinking spread always makes the task
    easier (a nearest-centroid rule is near-perfect for small spread)
    while at the default spread there is enough boundary mass that
    classification error responds smoothly to capacity loss.
    """
    if classes < 2 or dim < 2 or per_class < 2:
        raise InvalidSpecError(
            f"need classes >= 2, dim >= 2, per_class >= 2; got "
            f"({classes}, {dim}, {per_class})"
        )
    if spread <= 0:
        raise InvalidSpecError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(classes, dim))
    diffs = means[:, None, :] - means[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    min_dist = dist.min()
    target = 4.5 * spread
    if min_dist < target:
        means *= target / min_dist

    features = np.empty((classes * per_class, dim))
    labels = np.empty(classes * per_class, dtype=np.int64)
    for c in range(classes):
        block = slice(c * per_class, (c + 1) * per_class)
        features[block] = means[c] + rng.normal(scale=spread, size=(per_class, dim))
        labels[block] = c

    mu = features.mean(axis=0)
    sigma = features.std(axis=0)
    sigma[sigma == 0.0] = 1.0
    features = (features - mu) / sigma
    return LabeledSet(features, labels, classes)


def stratified_split(
    data: LabeledSet, spec: SplitSpec
) -> tuple[LabeledSet, LabeledSet, LabeledSet, LabeledSet]:
    """Partition data into disjoint (train, val, opt, test) subsets.

    The opt subset gets exactly opt_per_class rows per class; train/val
    take per-class rounded shares of the fractions and test absorbs the
    remainder, so class proportions stay within one sample of the source.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    buckets: dict[str, list[np.ndarray]] = {"train": [], "val": [], "opt": [], "test": []}
    for c in range(data.classes):
        idx = np.flatnonzero(data.labels == c)
        n_c = len(idx)
        n_train = int(round(spec.train_fraction * n_c))
        n_val = int(round(spec.val_fraction * n_c))
        if spec.opt_per_class + n_train + n_val > n_c:
            raise InvalidSpecError(
                f"class {c} has {n_c} rows; cannot supply opt={spec.opt_per_class}, "
                f"train={n_train}, val={n_val}"
            )
        idx = rng.permutation(idx)
        cut1 = spec.opt_per_class
        cut2 = cut1 + n_train
        cut3 = cut2 + n_val
        buckets["opt"].append(idx[:cut1])
        buckets["train"].append(idx[cut1:cut2])
        buckets["val"].append(idx[cut2:cut3])
        buckets["test"].append(idx[cut3:])

    def take(name: str) -> LabeledSet:
        rows = np.sort(np.concatenate(buckets[name]))
        return LabeledSet(data.features[rows], data.labels[rows], data.classes)

    return take("train"), take("val"), take("opt"), take("test")


def save_labeled_csv(data: LabeledSet, path: str | Path) -> None:
    """Delimited-text export; floats printed with full round-trip precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = data.features.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(dim)] + ["label"])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_labeled_csv(path: str | Path) -> LabeledSet:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise FormatError(f"{path}: expected a feature header ending in 'label'")
        dim = len(header) - 1
        feats, labels = [], []
        for row in reader:
            if len(row) != dim + 1:
                raise FormatError(f"{path}: row with {len(row)} fields, expected {dim + 1}")
            feats.append([float(v) for v in row[:dim]])
            labels.append(int(row[dim]))
    if not feats:
        raise FormatError(f"{path}: no data rows")
    labels_arr = np.asarray(labels, dtype=np.int64)
    return LabeledSet(np.asarray(feats), labels_arr, int(labels_arr.max()) + 1)
