"""Distances, attack success rate, robustness curves and optimality scores.

A distance of None marks a sample on which the attack failed; it behaves like
+∞ everywhere except AUREC, where it contributes the truncation point ε₀.
"""

import logging
import math
import statistics
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, DegenerateError, DimensionError
from .models import LeaderboardEntry, Norm

logger = logging.getLogger(__name__)

# Relative slack below which an LO numerator or denominator counts as zero.
LO_SNAP = 1e-12

Distance = Optional[float]


def distance(x: np.ndarray, x_adv: np.ndarray, p: Norm) -> float:
    """‖x_adv − x‖_p; ℓ0 counts coordinates that differ exactly."""
    x = np.asarray(x, dtype=np.float64)
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if x.shape != x_adv.shape:
        raise DimensionError(f"Cannot compare shapes {x.shape} and {x_adv.shape}")
    if p == Norm.L0:
        return float(np.count_nonzero(x_adv != x))
    return float(np.linalg.norm(x_adv - x, ord=p.order))


@dataclass(frozen=True)
class DistanceTable:
    """Per-sample minimum distances of one attack, keyed by sample hash."""

    distances: Mapping[str, Distance]
    norm: Norm
    name: str = ""

    def __post_init__(self) -> None:
        for sample_hash, d in self.distances.items():
            if d is not None and not (d >= 0 and math.isfinite(d)):
                raise DataError(f"{sample_hash}: distance {d} is not a finite non-negative value")

    def __len__(self) -> int:
        return len(self.distances)

    @property
    def hashes(self) -> frozenset[str]:
        return frozenset(self.distances)

    def finite(self) -> list[float]:
        return [d for d in self.distances.values() if d is not None]


def _require_samples(table: DistanceTable) -> int:
    if not table.distances:
        raise DataError("Distance table is empty")
    return len(table.distances)


def asr(table: DistanceTable, epsilon: float) -> float:
    """Fraction of samples with a successful adversarial within ε."""
    n = _require_samples(table)
    return sum(1 for d in table.distances.values() if d is not None and d <= epsilon) / n


def robust_accuracy(table: DistanceTable, epsilon: float) -> float:
    """ρ(ε) = 1 − ASR(ε), counted directly so corners are exact."""
    n = _require_samples(table)
    return sum(1 for d in table.distances.values() if d is None or d > epsilon) / n


def clean_accuracy(table: DistanceTable) -> float:
    """ρ = ρ(0): fraction of samples not misclassified at zero perturbation."""
    return robust_accuracy(table, 0.0)


def aurec(table: DistanceTable, eps0: float) -> float:
    """Area under the robustness curve on [0, ε₀].

    Closed form (1/n)·Σ min(d, ε₀) with failures contributing ε₀.
    """
    if eps0 <= 0:
        raise ConfigError(f"ε₀ must be positive, got {eps0}")
    n = _require_samples(table)
    return math.fsum(eps0 if d is None else min(d, eps0) for d in table.distances.values()) / n


def curve_points(table: DistanceTable, eps0: float) -> list[tuple[float, float]]:
    """Corners (ε, ρ(ε)) of the step curve: 0, each distance up to ε₀, and ε₀."""
    corners = sorted({0.0, eps0, *(d for d in table.finite() if d <= eps0)})
    return [(eps, robust_accuracy(table, eps)) for eps in corners]


def mean_distance(table: DistanceTable) -> Optional[float]:
    """Mean perturbation size over successful samples."""
    found = table.finite()
    return math.fsum(found) / len(found) if found else None


def median_distance(table: DistanceTable) -> Optional[float]:
    found = table.finite()
    return statistics.median(found) if found else None


def ensemble_best(tables: list[DistanceTable]) -> DistanceTable:
    """Sample-wise minimum over attacks; a failure survives only if all fail."""
    if not tables:
        raise DataError("No distance tables to combine")
    first = tables[0]
    for table in tables[1:]:
        label = table.name or "table"
        if table.norm != first.norm:
            raise DataError(f"{label} uses {table.norm.value}, expected {first.norm.value}")
        if table.hashes != first.hashes:
            raise DataError(f"{label} covers a different set of samples")

    best: dict[str, Distance] = {}
    for sample_hash in sorted(first.hashes):
        found = [t.distances[sample_hash] for t in tables if t.distances[sample_hash] is not None]
        best[sample_hash] = min(found) if found else None
    return DistanceTable(distances=best, norm=first.norm, name="ensemble")


def epsilon_zero(best: DistanceTable) -> float:
    """Smallest ε where the ensemble curve reaches zero (largest finite distance).

    When the ensemble fails on some samples the curve never reaches zero; ε₀
    is then the largest finite distance and those failures clamp to ε₀.
    """
    _require_samples(best)
    found = best.finite()
    if not found:
        raise ConfigError("Every attack failed on every sample; ε₀ is undefined")
    if len(found) < len(best):
        logger.warning(
            "Ensemble fails on %d of %d samples; clamping failures to ε₀",
            len(best) - len(found),
            len(best),
        )
    return max(found)


def _fills_box(aurec_star: float, box: float) -> bool:
    return box - aurec_star <= LO_SNAP * box


def local_optimality(aurec_i: float, aurec_star: float, rho: float, eps0: float) -> float:
    """Normalised gap (ρ·ε₀ − AUREC_i)/(ρ·ε₀ − AUREC*), clamped into [0, 1].

    Raises:
        DegenerateError: If the ensemble curve already fills the ρ·ε₀ box
    """
    box = rho * eps0
    if _fills_box(aurec_star, box):
        raise DegenerateError("The ensemble curve already fills the ρ·ε₀ box")
    numerator = box - aurec_i
    if numerator <= LO_SNAP * box:
        return 0.0
    return min(1.0, numerator / (box - aurec_star))


def filled_box_optimality(table: DistanceTable, best: DistanceTable, eps0: float) -> float:
    """LO in the limit ε₀ → ε₀⁺ for an ensemble whose successes all sit at ε₀.

    The ratio becomes the share of those successes the attack also reaches
    within ε₀: one for the ensemble, zero for an attack that never succeeds.
    """
    reached = [h for h, d in best.distances.items() if d is not None and d > 0]
    matched = sum(
        1 for h in reached if table.distances[h] is not None and table.distances[h] <= eps0
    )
    return matched / len(reached)


def global_optimality(los: Iterable[float]) -> float:
    """Mean local optimality across models."""
    values = list(los)
    if not values:
        raise DataError("No local optimality values to average")
    return math.fsum(values) / len(values)


def rank(entries: Iterable[LeaderboardEntry]) -> list[LeaderboardEntry]:
    """Descending GO, then fewer mean queries, then attack name."""
    return sorted(entries, key=lambda e: (-e.go, e.mean_queries, e.attack))


@dataclass
class OptimalityReport:
    """AUREC and LO of every attack evaluated against one model."""

    norm: Norm
    eps0: float
    rho: float
    aurec_star: float
    aurec: dict[str, float] = field(default_factory=dict)
    lo: dict[str, float] = field(default_factory=dict)
    clamped: bool = False
    filled: bool = False


def optimality_report(tables: Mapping[str, DistanceTable]) -> OptimalityReport:
    """Ensemble, ε₀, AURECs and LO for a set of attack tables on one model."""
    named = [
        DistanceTable(distances=t.distances, norm=t.norm, name=name)
        for name, t in sorted(tables.items())
    ]
    best = ensemble_best(named)
    eps0 = epsilon_zero(best)
    if eps0 <= 0:
        raise DegenerateError("The model misclassifies every sample; nothing to attack")
    rho = clean_accuracy(best)
    aurec_star = aurec(best, eps0)
    report = OptimalityReport(
        norm=best.norm,
        eps0=eps0,
        rho=rho,
        aurec_star=aurec_star,
        clamped=len(best.finite()) < len(best),
        filled=_fills_box(aurec_star, rho * eps0),
    )
    if report.filled:
        logger.info("Ensemble successes all sit at ε₀ = %g; scoring the ε₀⁺ limit", eps0)
    for table in named:
        report.aurec[table.name] = aurec(table, eps0)
        if report.filled:
            report.lo[table.name] = filled_box_optimality(table, best, eps0)
        else:
            report.lo[table.name] = local_optimality(
                report.aurec[table.name], aurec_star, rho, eps0
            )
    return report
