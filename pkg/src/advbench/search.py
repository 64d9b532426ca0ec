"""ε search turning a FixedBudget attack into a minimum-norm procedure.

Trials double ε after a failure and halve it after a success until a failing
and a succeeding radius bracket the boundary, then bisect. Every trial runs
on the same `BenchModel`, so the whole search shares one query budget.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attacks.engine import AttackResult, run_attack
from .benchmodel import BenchModel
from .errors import ConfigError
from .models import AttackConfig, AttackMode, SearchConfig

logger = logging.getLogger(__name__)

AttackRunner = Callable[..., AttackResult]


@dataclass
class SearchResult:
    epsilon: Optional[float]
    x_adv: Optional[np.ndarray]
    trials: list[tuple[float, bool]]


def trial_steps(total: int, trials: int) -> list[int]:
    """Split K steps over S trials: ⌊K/S⌋ each (at least one), remainder last."""
    per_trial = max(1, total // trials)
    last = max(per_trial, total - per_trial * (trials - 1))
    return [per_trial] * (trials - 1) + [last]


def at_epsilon(attack: AttackConfig, epsilon: float, steps: int) -> AttackConfig:
    """Copy of a FixedBudget attack at a new radius.

    Step size and random-init radius scale with ε.
    """
    ratio = epsilon / attack.epsilon
    return attack.model_copy(
        update={
            "epsilon": epsilon,
            "steps": steps,
            "step_size": attack.step_size * ratio,
            "init": attack.init.model_copy(update={"radius": attack.init.radius * ratio}),
        }
    )


def search(
    attack: AttackConfig,
    bm: BenchModel,
    x: np.ndarray,
    y: int,
    cfg: SearchConfig,
    runner: AttackRunner = run_attack,
    start: Optional[np.ndarray] = None,
    entropy: Sequence[int] = (),
) -> SearchResult:
    """Find the smallest ε at which the attack succeeds.

    Args:
        attack: FixedBudget attack; its `steps` is the total over all trials
        bm: Fresh wrapper shared by every trial
        x: Clean sample
        y: True label
        cfg: Number of trials and the starting ε per norm
        runner: Attack executor, `run_attack` unless testing
        start: Passed through to Adv initialisation
        entropy: Extra seed material; the trial index is appended

    Returns:
        SearchResult with the smallest successful ε (None if none succeeded)

    Raises:
        ConfigError: If the attack is not FixedBudget
    """
    if attack.mode != AttackMode.FIXED_BUDGET:
        raise ConfigError(f"ε search needs a fixed_budget attack, got {attack.mode.value}")

    epsilon = cfg.initial_epsilon(attack.p)
    failing: Optional[float] = None
    succeeding: Optional[float] = None
    best_x: Optional[np.ndarray] = None
    history: list[tuple[float, bool]] = []

    for trial, planned in enumerate(trial_steps(attack.steps, cfg.steps)):
        if bm.halted:
            break
        # A trial ends with one forward on its last iterate; never start one it cannot finish.
        steps = max(1, min(planned, bm.affordable_steps()))
        result = runner(
            at_epsilon(attack, epsilon, steps), bm, x, y, start=start, entropy=(*entropy, trial)
        )
        success = result.x_adv is not None
        history.append((epsilon, success))
        logger.debug("Search trial %d at eps=%g succeeded: %s", trial, epsilon, success)

        if success:
            if succeeding is None or epsilon < succeeding:
                succeeding = epsilon
                best_x = result.x_adv
        elif failing is None or epsilon > failing:
            failing = epsilon

        if failing is None:
            epsilon /= 2
        elif succeeding is None:
            epsilon *= 2
        else:
            epsilon = (failing + succeeding) / 2

    return SearchResult(epsilon=succeeding, x_adv=best_x, trials=history)
