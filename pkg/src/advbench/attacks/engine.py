"""The unified gradient attack loop.

Every attack is one configuration of the same loop:

    x_k   = clip(x + δ_k)            counted forward, loss, counted backward
    g′    = direction(∇L, α_k)
    δ     = optimizer(δ_k, g′)
    δ_k+1 = project(δ)               ε-ball (FixedBudget or heuristic), then box
    α_k+1 = scheduler(loss)

MinNorm heuristics adapt the radius between steps: DDN grows or shrinks an ℓ2
sphere, FMN tracks the decision boundary, and the penalty form (CW) trades
‖δ‖₂² against the loss over a grid of weights, stepping in tanh space.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..benchmodel import BenchModel
from ..errors import DimensionError
from ..metrics import distance
from ..models import AttackConfig, AttackMode, HeuristicKind, HeuristicSpec, Norm
from .components import (
    OptimizerState,
    StepSizeScheduler,
    cosine_annealing,
    dual_norm,
    initialize,
    optimizer_step,
    transform_direction,
)
from .losses import eval_loss
from .projection import (
    clip_box,
    from_tanh_space,
    project_ball,
    project_feasible,
    tanh_space_gradient,
    to_tanh_space,
)

logger = logging.getLogger(__name__)


@dataclass
class AttackResult:
    """What the attack itself would hand back.

    `x_adv` is the attack's own answer (None when it found nothing); the
    benchmark ignores it in favour of the wrapper's tracker. `x_last` is the
    final iterate.
    """

    x_adv: Optional[np.ndarray]
    x_last: np.ndarray


class _OwnBest:
    """The attack's own record of its answer."""

    def __init__(self, x: np.ndarray, y: int, p: Norm, keep_smallest: bool) -> None:
        self.x = x
        self.y = y
        self.p = p
        self.keep_smallest = keep_smallest
        self.x_adv: Optional[np.ndarray] = None
        self.distance = math.inf

    def observe(self, x_query: np.ndarray, logits: np.ndarray) -> bool:
        if int(np.argmax(logits)) == self.y:
            return False
        d = distance(self.x, x_query, self.p)
        if not self.keep_smallest or d < self.distance:
            self.distance = d
            self.x_adv = x_query.copy()
        return True


def run_attack(
    config: AttackConfig,
    bm: BenchModel,
    x: np.ndarray,
    y: int,
    start: Optional[np.ndarray] = None,
    entropy: Sequence[int] = (),
) -> AttackResult:
    """Run one attack against a budgeted model.

    Args:
        config: Attack slots and hyperparameters
        bm: Wrapper bound to (x, y); every model access goes through it
        x: Clean sample
        y: True label
        start: Misclassified starting point for Adv initialisation
        entropy: Extra seed material (sample hash, search trial)

    Returns:
        AttackResult with the attack's own answer and last iterate
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (bm.input_dim,):
        raise DimensionError(f"Sample has shape {x.shape}, model expects ({bm.input_dim},)")
    rng = np.random.default_rng([config.seed, *entropy])
    if config.heuristic.kind == HeuristicKind.PENALTY:
        return _run_penalty(config, bm, x, y, rng, start)
    return _run_descent(config, bm, x, y, rng, start)


def _fmn_radius(
    spec: HeuristicSpec,
    p: Norm,
    k: int,
    total: int,
    epsilon: float,
    delta: np.ndarray,
    loss: float,
    grad: np.ndarray,
    is_adv: bool,
    own: _OwnBest,
) -> float:
    """Boundary-tracking radius update.

    Before the first success ε jumps to the linearised boundary estimate
    ‖δ‖ + L/‖∇L‖_dual, growing by at least (1 + γ) per step; afterwards it
    shrinks by (1 − γ) on success and grows by (1 + γ) on failure, γ decaying
    on a cosine.
    """
    found = own.x_adv is not None
    if p == Norm.L0:
        if is_adv:
            radius = min(epsilon - 1, own.distance)
        elif found:
            radius = epsilon + 1
        else:
            radius = np.count_nonzero(delta) + 1
        return float(min(max(radius, 0), delta.size))

    gamma = cosine_annealing(spec.gamma, spec.gamma_final, k, total)
    if is_adv:
        return min(epsilon * (1 - gamma), own.distance)
    if found:
        return epsilon * (1 + gamma)
    current = float(np.linalg.norm(delta, ord=p.order))
    scale = dual_norm(grad, p)
    estimate = current + loss / scale if scale > 0 else current
    return max(estimate, epsilon * (1 + gamma))


def _run_descent(
    config: AttackConfig,
    bm: BenchModel,
    x: np.ndarray,
    y: int,
    rng: np.random.Generator,
    start: Optional[np.ndarray],
) -> AttackResult:
    p = config.p
    heuristic = config.heuristic
    own = _OwnBest(x, y, p, keep_smallest=config.mode == AttackMode.MIN_NORM)

    delta = initialize(config.init, x, p, rng, start)
    delta = project_feasible(x, delta, config.mode, p, config.epsilon)
    radius = heuristic.init_radius if heuristic.kind == HeuristicKind.DDN else 0.0

    state = OptimizerState.zeros(x.size)
    scheduler = StepSizeScheduler(config.scheduler, config.step_size, config.steps)

    for k in range(config.steps):
        x_k = np.clip(x + delta, 0.0, 1.0)
        logits = bm.counted_forward(x_k)
        is_adv = own.observe(x_k, logits)
        loss, seed = eval_loss(config.loss, logits, y, config.margin)
        if bm.halted:
            break
        grad = bm.counted_backward(x_k, seed)
        step, stalled = transform_direction(config.direction, grad, scheduler.alpha, p)
        if stalled:
            logger.debug("Zero gradient at step %d", k)

        delta = x_k - x
        if heuristic.kind == HeuristicKind.FMN:
            radius = _fmn_radius(
                heuristic, p, k, config.steps, radius, delta, loss, grad, is_adv, own
            )
        delta, state = optimizer_step(config.optimizer, delta, step, state, scheduler.alpha)

        if heuristic.kind == HeuristicKind.DDN:
            radius *= (1 - heuristic.gamma) if is_adv else (1 + heuristic.gamma)
            norm = float(np.linalg.norm(delta))
            if norm > 0:
                delta = delta * (radius / norm)
        elif heuristic.kind == HeuristicKind.FMN:
            delta = project_ball(delta, p, radius)
        delta = project_feasible(x, delta, config.mode, p, config.epsilon)
        scheduler.step(loss)
        if bm.halted:
            break

    x_last = np.clip(x + delta, 0.0, 1.0)
    own.observe(x_last, bm.counted_forward(x_last))
    return AttackResult(x_adv=own.x_adv, x_last=x_last)


def _run_penalty(
    config: AttackConfig,
    bm: BenchModel,
    x: np.ndarray,
    y: int,
    rng: np.random.Generator,
    start: Optional[np.ndarray],
) -> AttackResult:
    """Minimise ‖δ‖₂² + c·L for each weight c of the grid, cold-starting each trial.

    The iterate lives in tanh space, x_k = (tanh(w)/s + 1)/2, so the box holds
    without clipping and the optimizer state never pushes against a face.
    """
    p = config.p
    grid = config.heuristic.penalty_grid
    per_trial = max(1, config.steps // len(grid))
    own = _OwnBest(x, y, p, keep_smallest=True)
    x_last = x.copy()

    for weight in grid:
        w = to_tanh_space(x + clip_box(x, initialize(config.init, x, p, rng, start)))
        state = OptimizerState.zeros(x.size)
        scheduler = StepSizeScheduler(config.scheduler, config.step_size, per_trial)
        for _ in range(min(per_trial, bm.affordable_steps())):
            x_k = from_tanh_space(w)
            logits = bm.counted_forward(x_k)
            own.observe(x_k, logits)
            loss, seed = eval_loss(config.loss, logits, y, config.margin)
            if bm.halted:
                break
            delta = x_k - x
            objective = bm.counted_backward(x_k, weight * seed) + 2.0 * delta
            direction = tanh_space_gradient(w, objective)
            step, _ = transform_direction(config.direction, direction, scheduler.alpha, p)
            w, state = optimizer_step(config.optimizer, w, step, state, scheduler.alpha)
            scheduler.step(float(np.dot(delta, delta)) + weight * loss)
            if bm.halted:
                break
        x_last = from_tanh_space(w)
        own.observe(x_last, bm.counted_forward(x_last))
        logger.debug("Penalty weight %g: best distance %g", weight, own.distance)
        if bm.halted:
            break

    return AttackResult(x_adv=own.x_adv, x_last=x_last)
