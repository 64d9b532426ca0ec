"""Misclassification losses.

Every loss is large while x is correctly classified and the attack minimizes
it. `eval_loss` also returns ∂L/∂logits, the seed for the backward pass.
"""

import numpy as np

from ..errors import ConfigError, DimensionError
from ..models import LossKind

# Keeps DLR finite when the top logits coincide.
DLR_EPS = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def runner_up(logits: np.ndarray, y: int) -> int:
    """argmax over j ≠ y, ties to the lowest index."""
    masked = np.array(logits, dtype=np.float64, copy=True)
    masked[y] = -np.inf
    return int(np.argmax(masked))


def logit_margin(logits: np.ndarray, y: int) -> float:
    """f_y − max_{j≠y} f_j; negative once x is misclassified."""
    return float(logits[y] - logits[runner_up(logits, y)])


def eval_loss(
    kind: LossKind, logits: np.ndarray, y: int, margin: float = 0.0
) -> tuple[float, np.ndarray]:
    """Evaluate a loss and its gradient with respect to the logits.

    Args:
        kind: Loss slot of the attack
        logits: Model output, length C
        y: True label
        margin: κ for DL; the loss is clamped from below at −κ

    Returns:
        (loss, seed) where seed = ∂L/∂logits

    Raises:
        ConfigError: DLR on fewer than three classes
    """
    logits = np.asarray(logits, dtype=np.float64)
    n_classes = logits.shape[0]
    if not 0 <= y < n_classes:
        raise DimensionError(f"Label {y} outside [0, {n_classes})")
    seed = np.zeros(n_classes)

    if kind == LossKind.LOGIT:
        seed[y] = 1.0
        return float(logits[y]), seed

    if kind == LossKind.SOFTMAX:
        z = softmax(logits)
        seed = -z[y] * z
        seed[y] += z[y]
        return float(z[y]), seed

    if kind == LossKind.NCE:
        shifted = logits - np.max(logits)
        log_z = shifted - np.log(np.sum(np.exp(shifted)))
        seed = -np.exp(log_z)
        seed[y] += 1.0
        return float(log_z[y]), seed

    j = runner_up(logits, y)
    difference = float(logits[y] - logits[j])

    if kind == LossKind.DL:
        if difference < -margin:
            return -margin, seed
        seed[y] = 1.0
        seed[j] = -1.0
        return difference, seed

    if kind == LossKind.DLR:
        if n_classes < 3:
            raise ConfigError("DLR loss needs at least 3 classes")
        order = np.argsort(-logits, kind="stable")
        first, third = int(order[0]), int(order[2])
        scale = float(logits[first] - logits[third]) + DLR_EPS
        seed[y] += 1.0 / scale
        seed[j] -= 1.0 / scale
        seed[first] -= difference / scale**2
        seed[third] += difference / scale**2
        return difference / scale, seed

    raise ConfigError(f"Unknown loss: {kind}")
