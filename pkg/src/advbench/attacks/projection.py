"""Feasibility projections: ℓp balls and the [0,1]^d box."""

import math

import numpy as np

from ..models import AttackMode, Norm


def project_simplex(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of a non-negative vector onto {w ≥ 0, Σw = radius}.

    Sort-based algorithm: find the largest ρ with
    v_(ρ) − (Σ_{i≤ρ} v_(i) − radius)/ρ > 0 and shift by that threshold.
    """
    if radius <= 0:
        return np.zeros_like(v)
    ordered = np.sort(v)[::-1]
    cumulative = np.cumsum(ordered)
    ranks = np.arange(1, v.size + 1)
    thresholds = (cumulative - radius) / ranks
    rho = int(np.nonzero(ordered - thresholds > 0)[0][-1])
    return np.maximum(v - thresholds[rho], 0.0)


def project_l1_ball(delta: np.ndarray, radius: float) -> np.ndarray:
    if np.abs(delta).sum() <= radius:
        return delta.copy()
    return np.sign(delta) * project_simplex(np.abs(delta), radius)


def project_l2_ball(delta: np.ndarray, radius: float) -> np.ndarray:
    norm = float(np.linalg.norm(delta))
    if norm <= radius:
        return delta.copy()
    return delta * (radius / norm)


def project_linf_ball(delta: np.ndarray, radius: float) -> np.ndarray:
    return np.clip(delta, -radius, radius)


def project_l0_ball(delta: np.ndarray, radius: float) -> np.ndarray:
    """Keep the ⌊radius⌋ largest-magnitude coordinates, zero the rest."""
    keep = int(math.floor(radius))
    if np.count_nonzero(delta) <= keep:
        return delta.copy()
    projected = np.zeros_like(delta)
    if keep > 0:
        order = np.argsort(-np.abs(delta), kind="stable")[:keep]
        projected[order] = delta[order]
    return projected


_BALLS = {
    Norm.L0: project_l0_ball,
    Norm.L1: project_l1_ball,
    Norm.L2: project_l2_ball,
    Norm.LINF: project_linf_ball,
}


def project_ball(delta: np.ndarray, p: Norm, radius: float) -> np.ndarray:
    return _BALLS[p](np.asarray(delta, dtype=np.float64), radius)


def clip_box(x: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Shrink δ so that x + δ ∈ [0,1]^d."""
    return np.clip(x + delta, 0.0, 1.0) - x


# Keeps arctanh finite for points on the faces of the box.
TANH_SMOOTHER = 0.999999


def to_tanh_space(x: np.ndarray) -> np.ndarray:
    """w with from_tanh_space(w) = x for x in the box."""
    return np.arctanh((2.0 * np.clip(x, 0.0, 1.0) - 1.0) * TANH_SMOOTHER)


def from_tanh_space(w: np.ndarray) -> np.ndarray:
    """Map any w into the box; every w is feasible."""
    return np.clip((np.tanh(w) / TANH_SMOOTHER + 1.0) / 2.0, 0.0, 1.0)


def tanh_space_gradient(w: np.ndarray, grad_x: np.ndarray) -> np.ndarray:
    """Chain ∂/∂x through from_tanh_space to ∂/∂w."""
    return grad_x * (1.0 - np.tanh(w) ** 2) / (2.0 * TANH_SMOOTHER)


def project_feasible(
    x: np.ndarray,
    delta: np.ndarray,
    mode: AttackMode,
    p: Norm,
    epsilon: float | None = None,
) -> np.ndarray:
    """Project δ onto the feasible set: ε-ball first (FixedBudget), then the box.

    No alternating re-projection: box clipping moves every coordinate toward
    zero, so the result stays inside the ball.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if mode == AttackMode.FIXED_BUDGET and epsilon is not None:
        delta = project_ball(delta, p, epsilon)
    return clip_box(x, delta)
