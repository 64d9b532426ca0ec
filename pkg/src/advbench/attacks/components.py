"""Pluggable attack components: initialisation, descent direction, optimizer
step and step-size schedulers."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InitError
from ..models import (
    DirectionKind,
    InitKind,
    InitSpec,
    Norm,
    OptimizerKind,
    OptimizerSpec,
    SchedulerKind,
    SchedulerSpec,
)
from .projection import clip_box

# Minimum loss decrease counted as progress by reduce-on-plateau.
PLATEAU_TOLERANCE = 1e-9


# Initialisation


def _sample_ball(p: Norm, radius: float, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample from the ℓp ball of the given radius."""
    if p == Norm.LINF:
        return rng.uniform(-radius, radius, size=dim)
    if p == Norm.L2:
        direction = rng.standard_normal(dim)
        direction /= max(np.linalg.norm(direction), np.finfo(float).tiny)
        return direction * radius * rng.uniform() ** (1.0 / dim)
    if p == Norm.L1:
        # Exponential spacings give a uniform point of the simplex interior.
        spacings = rng.exponential(size=dim + 1)
        signs = rng.choice([-1.0, 1.0], size=dim)
        return signs * radius * spacings[:dim] / spacings.sum()
    support = min(dim, int(math.floor(radius)))
    delta = np.zeros(dim)
    chosen = rng.choice(dim, size=support, replace=False)
    delta[chosen] = rng.uniform(-1.0, 1.0, size=support)
    return delta


def initialize(
    spec: InitSpec,
    x: np.ndarray,
    p: Norm,
    rng: np.random.Generator,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Initial perturbation δ₀.

    Zero starts at x, Random samples the p-ball of `spec.radius` intersected
    with the box, Adv starts from a misclassified point supplied as `start`.

    Raises:
        InitError: Adv initialisation without a starting point
    """
    x = np.asarray(x, dtype=np.float64)
    if spec.kind == InitKind.ZERO:
        return np.zeros_like(x)
    if spec.kind == InitKind.RANDOM:
        if spec.radius == 0:
            return np.zeros_like(x)
        return clip_box(x, _sample_ball(p, spec.radius, x.size, rng))
    if spec.kind == InitKind.ADV:
        if start is None:
            raise InitError("Adv initialisation needs a misclassified starting point")
        start = np.asarray(start, dtype=np.float64)
        if start.shape != x.shape:
            raise InitError("Starting point has the wrong dimension")
        return start - x
    raise ConfigError(f"Unknown init: {spec.kind}")


# Descent directions


def dual_norm(g: np.ndarray, p: Norm) -> float:
    """‖g‖_q with 1/p + 1/q = 1 (ℓ0 treated like ℓ2)."""
    order = {Norm.L0: 2, Norm.L1: np.inf, Norm.L2: 2, Norm.LINF: 1}[p]
    return float(np.linalg.norm(g, ord=order))


def _normalized(g: np.ndarray, alpha: float, order: float) -> tuple[np.ndarray, bool]:
    scale = float(np.linalg.norm(g, ord=order))
    if scale == 0.0 or not math.isfinite(scale):
        return np.zeros_like(g), True
    return alpha * g / scale, False


def transform_direction(
    kind: DirectionKind, g: np.ndarray, alpha: float, p: Norm
) -> tuple[np.ndarray, bool]:
    """Turn a raw gradient into the step g′.

    Returns:
        (g′, stalled) where stalled flags a zero gradient under Norm/Proj
    """
    g = np.asarray(g, dtype=np.float64)
    if kind == DirectionKind.GRAD:
        return alpha * g, False
    if kind == DirectionKind.NORM:
        # ℓ0 has no usable norm for scaling; FMN-style attacks use ℓ2.
        order = 2 if p == Norm.L0 else p.order
        return _normalized(g, alpha, order)
    if kind == DirectionKind.PROJ:
        if p == Norm.L2:
            return _normalized(g, alpha, 2)
        if not np.any(g):
            return np.zeros_like(g), True
        if p == Norm.LINF:
            return alpha * np.sign(g), False
        if p == Norm.L1:
            step = np.zeros_like(g)
            top = int(np.argmax(np.abs(g)))
            step[top] = alpha * np.sign(g[top])
            return step, False
        raise ConfigError("proj direction is not defined for l0")
    raise ConfigError(f"Unknown direction: {kind}")


# Optimizers


@dataclass
class OptimizerState:
    """Per-run optimizer memory."""

    velocity: np.ndarray
    first_moment: np.ndarray
    second_moment: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "OptimizerState":
        return cls(np.zeros(dim), np.zeros(dim), np.zeros(dim))


def optimizer_step(
    spec: OptimizerSpec,
    delta: np.ndarray,
    step: np.ndarray,
    state: OptimizerState,
    alpha: float = 1.0,
) -> tuple[np.ndarray, OptimizerState]:
    """Descent update δ_{k+1} (before projection).

    GD subtracts g′. Momentum keeps v₀ = 0, v_{k+1} = β·v_k + g′. Adam forms
    bias-corrected moments of g′ and steps by α·m̂/(√v̂ + ε), so its first
    step on a constant gradient is −α·sign(g).
    """
    if spec.kind == OptimizerKind.GD:
        return delta - step, state
    if spec.kind == OptimizerKind.MOMENTUM:
        state.velocity = spec.beta * state.velocity + step
        return delta - state.velocity, state
    if spec.kind == OptimizerKind.ADAM:
        state.t += 1
        state.first_moment = spec.beta1 * state.first_moment + (1 - spec.beta1) * step
        state.second_moment = spec.beta2 * state.second_moment + (1 - spec.beta2) * step**2
        m_hat = state.first_moment / (1 - spec.beta1**state.t)
        v_hat = state.second_moment / (1 - spec.beta2**state.t)
        return delta - alpha * m_hat / (np.sqrt(v_hat) + spec.eps), state
    raise ConfigError(f"Unknown optimizer: {spec.kind}")


# Step-size schedulers


def cosine_annealing(start: float, end: float, k: int, total: int) -> float:
    """end + ½(start − end)(1 + cos(πk/K))."""
    if total <= 0:
        return start
    return end + 0.5 * (start - end) * (1.0 + math.cos(math.pi * k / total))


class StepSizeScheduler:
    """Step size α_k for iteration k of K, driven by the loss history.

    Call `step(loss)` once per iteration after the loss is observed; `alpha`
    then holds the step size for the next iteration.
    """

    def __init__(self, spec: SchedulerSpec, initial: float, total_steps: int) -> None:
        self.spec = spec
        self.initial = initial
        self.total_steps = total_steps
        self.final = spec.final_step_size if spec.final_step_size is not None else initial / 100
        self.k = 0
        self.alpha = initial
        self._best_loss = math.inf
        self._stale = 0

    def _closed_form(self, k: int) -> float:
        kind = self.spec.kind
        if kind == SchedulerKind.FIXED:
            return self.initial
        if kind in (SchedulerKind.LIN, SchedulerKind.EXP):
            return self.initial * self.spec.gamma**k
        if kind == SchedulerKind.COS:
            return cosine_annealing(self.initial, self.final, k, self.total_steps)
        if kind == SchedulerKind.POLY:
            remaining = max(0.0, 1.0 - k / self.total_steps)
            return self.final + (self.initial - self.final) * remaining**self.spec.power
        raise ConfigError(f"Unknown scheduler: {kind}")

    def step(self, loss: float | None = None) -> float:
        self.k += 1
        if self.spec.kind == SchedulerKind.ROP:
            if loss is not None and loss < self._best_loss - PLATEAU_TOLERANCE:
                self._best_loss = loss
                self._stale = 0
            else:
                self._stale += 1
            if self._stale >= self.spec.patience:
                self.alpha *= self.spec.factor
                self._stale = 0
        else:
            self.alpha = self._closed_form(self.k)
        return self.alpha


def schedule(
    spec: SchedulerSpec,
    initial: float,
    k: int,
    total_steps: int,
    loss_history: list[float] | None = None,
) -> float:
    """α_k as a pure function of the iteration and the losses seen so far."""
    scheduler = StepSizeScheduler(spec, initial, total_steps)
    history = loss_history or []
    for i in range(k):
        scheduler.step(history[i] if i < len(history) else None)
    return scheduler.alpha
