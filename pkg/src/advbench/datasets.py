"""Benchmark datasets: synthetic generators and CSV files.

CSV layout: one sample per row, d feature columns followed by the integer
label, no header.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, FormatError


class SyntheticKind(str, Enum):
    BLOBS = "blobs"
    MOONS = "moons"


@dataclass(frozen=True)
class Dataset:
    """Samples in [0,1]^d with labels in [0, C)."""

    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,)
    num_classes: int

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise DataError("Features must be (n, d) with one label per row")
        if self.num_classes < 2:
            raise DataError("A dataset needs at least two classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataError(f"Labels must lie in [0, {self.num_classes})")
        if self.features.size and (self.features.min() < 0 or self.features.max() > 1):
            raise DataError("Features must lie in [0, 1]")

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])


def min_max_scale(features: np.ndarray) -> np.ndarray:
    """Scale every column into [0, 1]; constant columns become 0."""
    low = features.min(axis=0)
    span = features.max(axis=0) - low
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (features - low) / safe, 0.0)


def _blobs(
    n: int, d: int, classes: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    angles = 2 * math.pi * np.arange(classes) / classes
    centres = np.zeros((classes, d))
    centres[:, 0] = 5 * np.cos(angles)
    if d > 1:
        centres[:, 1] = 5 * np.sin(angles)
    labels = np.arange(n) % classes
    features = centres[labels] + rng.standard_normal((n, d))
    return features, labels


def _moons(n: int, d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if d < 2:
        raise ConfigError("moons needs at least two dimensions")
    labels = np.arange(n) % 2
    t = rng.uniform(0.0, math.pi, size=n)
    features = np.zeros((n, d))
    features[:, 0] = np.where(labels == 0, np.cos(t), 1 - np.cos(t))
    features[:, 1] = np.where(labels == 0, np.sin(t), 0.5 - np.sin(t))
    features += 0.1 * rng.standard_normal((n, d))
    return features, labels


def generate_synthetic(
    kind: SyntheticKind | str, n: int, d: int = 2, seed: int = 0, classes: int = 3
) -> Dataset:
    """Deterministic synthetic dataset scaled into [0,1]^d.

    Blobs place `classes` Gaussian clusters (unit std) on a circle of radius
    5 in the first two dimensions. Moons is the two interleaved half circles.

    Raises:
        ConfigError: If n < 1, d < 1 or the kind is unknown
    """
    if n < 1:
        raise ConfigError(f"Need at least one sample, got n={n}")
    if d < 1:
        raise ConfigError(f"Need at least one dimension, got d={d}")
    try:
        kind = SyntheticKind(kind)
    except ValueError:
        raise ConfigError(f"Unknown synthetic dataset {kind!r}") from None
    rng = np.random.default_rng(seed)
    if kind == SyntheticKind.BLOBS:
        if classes < 2:
            raise ConfigError("blobs needs at least two classes")
        features, labels = _blobs(n, d, classes, rng)
    else:
        classes = 2
        features, labels = _moons(n, d, rng)
    order = rng.permutation(n)
    return Dataset(
        features=min_max_scale(features[order]),
        labels=labels[order].astype(np.int64),
        num_classes=classes,
    )


def load_dataset(path: Path, num_classes: int | None = None) -> Dataset:
    """Read a dataset CSV.

    The class count defaults to max(label) + 1 (at least 2).

    Raises:
        FormatError: If rows are ragged, non-numeric or labels are not integers
        DataError: If the file holds no samples or values fall outside range
    """
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e
    if table.size == 0:
        raise DataError(f"{path}: no samples")
    if table.shape[1] < 2:
        raise FormatError(f"{path}: need feature columns and a label column")
    raw_labels = table[:, -1]
    if not np.all(raw_labels == np.round(raw_labels)):
        raise FormatError(f"{path}: labels must be integers")
    labels = raw_labels.astype(np.int64)
    classes = num_classes if num_classes is not None else max(2, int(labels.max()) + 1)
    return Dataset(features=table[:, :-1].copy(), labels=labels, num_classes=classes)


def save_dataset(dataset: Dataset, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.column_stack([dataset.features, dataset.labels.astype(np.float64)])
    formats = ["%.17g"] * dataset.dim + ["%d"]
    np.savetxt(path, rows, delimiter=",", fmt=formats)
