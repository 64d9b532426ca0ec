"""Named attack presets expressed as slot assignments of the unified loop.

FixedBudget presets are defined at the ε-search starting radius for their
norm; step size and random-init radius are given relative to ε so the search
can rescale them.
"""

from ..errors import ConfigError
from ..models import (
    DEFAULT_EPS_INIT,
    AttackConfig,
    AttackMode,
    DirectionKind,
    HeuristicKind,
    HeuristicSpec,
    InitKind,
    InitSpec,
    LossKind,
    Norm,
    OptimizerKind,
    OptimizerSpec,
    SchedulerKind,
    SchedulerSpec,
)

# Shared iteration budget: 1000 steps of one forward and one backward.
STEPS = 1000

# PGD random starts fill a tenth of the ball.
RANDOM_START_RATIO = 0.1


def _single_step(name: str, p: Norm) -> AttackConfig:
    eps = DEFAULT_EPS_INIT[p]
    return AttackConfig(
        name=name,
        mode=AttackMode.FIXED_BUDGET,
        p=p,
        loss=LossKind.NCE,
        init=InitSpec(kind=InitKind.ZERO),
        direction=DirectionKind.PROJ,
        optimizer=OptimizerSpec(kind=OptimizerKind.GD),
        scheduler=SchedulerSpec(kind=SchedulerKind.FIXED),
        steps=1,
        step_size=eps,
        epsilon=eps,
    )


def _pgd(name: str, p: Norm, random_start: bool, step_ratio: float) -> AttackConfig:
    eps = DEFAULT_EPS_INIT[p]
    init = (
        InitSpec(kind=InitKind.RANDOM, radius=eps * RANDOM_START_RATIO)
        if random_start
        else InitSpec()
    )
    return AttackConfig(
        name=name,
        mode=AttackMode.FIXED_BUDGET,
        p=p,
        loss=LossKind.NCE,
        init=init,
        direction=DirectionKind.PROJ,
        optimizer=OptimizerSpec(kind=OptimizerKind.GD),
        scheduler=SchedulerSpec(kind=SchedulerKind.FIXED),
        steps=STEPS,
        step_size=eps * step_ratio,
        epsilon=eps,
    )


def _ddn() -> AttackConfig:
    # Sphere starts at radius 1 and moves by 5% per step.
    return AttackConfig(
        name="DDN",
        mode=AttackMode.MIN_NORM,
        p=Norm.L2,
        loss=LossKind.NCE,
        direction=DirectionKind.NORM,
        optimizer=OptimizerSpec(kind=OptimizerKind.GD),
        scheduler=SchedulerSpec(kind=SchedulerKind.COS),
        steps=STEPS,
        step_size=0.2,
        heuristic=HeuristicSpec(kind=HeuristicKind.DDN, gamma=0.05, init_radius=1.0),
    )


def _fmn(p: Norm) -> AttackConfig:
    # γ decays 0.05 → 0.001 on a cosine; α decays to α₀/100.
    return AttackConfig(
        name=f"FMN-{_SUFFIX[p]}",
        mode=AttackMode.MIN_NORM,
        p=p,
        loss=LossKind.DL,
        direction=DirectionKind.NORM,
        optimizer=OptimizerSpec(kind=OptimizerKind.GD),
        scheduler=SchedulerSpec(kind=SchedulerKind.COS),
        steps=STEPS,
        step_size=1.0,
        heuristic=HeuristicSpec(kind=HeuristicKind.FMN, gamma=0.05, gamma_final=0.001),
    )


def _cw() -> AttackConfig:
    return AttackConfig(
        name="CW-L2",
        mode=AttackMode.MIN_NORM,
        p=Norm.L2,
        loss=LossKind.DL,
        margin=0.0,
        direction=DirectionKind.GRAD,
        optimizer=OptimizerSpec(kind=OptimizerKind.ADAM),
        scheduler=SchedulerSpec(kind=SchedulerKind.COS),
        steps=STEPS,
        step_size=0.1,
        heuristic=HeuristicSpec(kind=HeuristicKind.PENALTY),
    )


_SUFFIX = {Norm.L0: "L0", Norm.L1: "L1", Norm.L2: "L2", Norm.LINF: "Linf"}

PRESETS = {
    "FGSM": lambda: _single_step("FGSM", Norm.LINF),
    "FGM": lambda: _single_step("FGM", Norm.L2),
    "BIM": lambda: _pgd("BIM", Norm.LINF, random_start=False, step_ratio=0.1),
    "PGD-L1": lambda: _pgd("PGD-L1", Norm.L1, random_start=True, step_ratio=0.1),
    "PGD-L2": lambda: _pgd("PGD-L2", Norm.L2, random_start=True, step_ratio=0.1),
    "PGD-Linf": lambda: _pgd("PGD-Linf", Norm.LINF, random_start=True, step_ratio=0.1),
    "DDN": _ddn,
    "FMN-L0": lambda: _fmn(Norm.L0),
    "FMN-L1": lambda: _fmn(Norm.L1),
    "FMN-L2": lambda: _fmn(Norm.L2),
    "FMN-Linf": lambda: _fmn(Norm.LINF),
    "CW-L2": _cw,
}


def preset(name: str) -> AttackConfig:
    """Look up a preset by its exact name.

    Raises:
        ConfigError: If no preset has that name
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"Unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def preset_names() -> list[str]:
    return list(PRESETS)
