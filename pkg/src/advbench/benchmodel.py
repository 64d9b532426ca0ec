"""Query-counted model wrapper.

A `BenchModel` is bound to one sample (x, y). It counts forward and backward
passes against a combined budget Q, neutralises every call once the budget is
spent, and remembers the closest misclassified input it was ever shown.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionError
from .metrics import distance
from .models import Norm
from .network import ModelParams, forward, gradient


@dataclass
class QueryLedger:
    budget: int
    forwards: int = 0
    backwards: int = 0
    halted: bool = False

    @property
    def used(self) -> int:
        return self.forwards + self.backwards

    def charge_forward(self) -> None:
        self.forwards += 1
        self.halted = self.used >= self.budget

    def charge_backward(self) -> None:
        self.backwards += 1
        self.halted = self.used >= self.budget


@dataclass
class BestTracker:
    distance: Optional[float] = None
    adversarial: Optional[np.ndarray] = None

    def offer(self, candidate: np.ndarray, d: float) -> None:
        if self.distance is None or d < self.distance:
            self.distance = d
            self.adversarial = candidate.copy()


class BenchModel:
    """Budgeted view of a model for a single sample.

    Args:
        model: Network under attack
        budget: Q, forwards plus backwards allowed
        norm: Threat-model norm used to rank adversarial inputs
        x: Clean sample
        y: True label

    Raises:
        ConfigError: If the budget is below one
    """

    def __init__(self, model: ModelParams, budget: int, norm: Norm, x: np.ndarray, y: int) -> None:
        if budget < 1:
            raise ConfigError(f"Query budget must be at least 1, got {budget}")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (model.input_dim,):
            raise DimensionError(f"Sample has shape {x.shape}, model expects ({model.input_dim},)")
        if not 0 <= y < model.num_classes:
            raise DimensionError(f"Label {y} outside [0, {model.num_classes})")
        self.model = model
        self.norm = norm
        self.x = x
        self.y = int(y)
        self.ledger = QueryLedger(budget=budget)
        self.tracker = BestTracker()

    @property
    def budget(self) -> int:
        return self.ledger.budget

    @property
    def halted(self) -> bool:
        return self.ledger.halted

    @property
    def input_dim(self) -> int:
        return self.model.input_dim

    @property
    def num_classes(self) -> int:
        return self.model.num_classes

    def init_queries(self) -> None:
        """Zero the ledger and forget the tracked adversarial."""
        self.ledger = QueryLedger(budget=self.ledger.budget)
        self.tracker = BestTracker()

    @property
    def remaining(self) -> int:
        return max(0, self.ledger.budget - self.ledger.used)

    def affordable_steps(self) -> int:
        """Full forward+backward steps that still leave one forward in the budget."""
        return max(0, (self.remaining - 1) // 2)

    def _check(self, x_query: np.ndarray) -> np.ndarray:
        x_query = np.asarray(x_query, dtype=np.float64)
        if x_query.shape != self.x.shape:
            raise DimensionError(f"Query has shape {x_query.shape}, expected {self.x.shape}")
        return x_query

    def _fabricated_logits(self) -> np.ndarray:
        logits = np.zeros(self.num_classes)
        logits[self.y] = 1.0
        return logits

    def counted_forward(self, x_query: np.ndarray) -> np.ndarray:
        """Logits of x_query, or one-hot logits at y once the budget is spent."""
        x_query = self._check(x_query)
        if self.ledger.halted:
            return self._fabricated_logits()
        self.ledger.charge_forward()
        logits = forward(self.model, x_query).logits
        in_box = bool(np.all(x_query >= 0.0) and np.all(x_query <= 1.0))
        if int(np.argmax(logits)) != self.y and in_box:
            self.tracker.offer(x_query, distance(self.x, x_query, self.norm))
        return logits

    def counted_backward(self, x_query: np.ndarray, seed: np.ndarray) -> np.ndarray:
        """∂(seedᵀ·logits)/∂x at x_query, or zeros once the budget is spent."""
        x_query = self._check(x_query)
        if self.ledger.halted:
            return np.zeros(self.input_dim)
        self.ledger.charge_backward()
        return gradient(self.model, forward(self.model, x_query), seed)

    def num_queries(self) -> tuple[int, int]:
        return self.ledger.forwards, self.ledger.backwards

    def take_best(self) -> tuple[Optional[float], Optional[np.ndarray]]:
        """Closest misclassified input seen so far, or (None, None)."""
        if self.tracker.adversarial is None:
            return None, None
        return self.tracker.distance, self.tracker.adversarial.copy()
