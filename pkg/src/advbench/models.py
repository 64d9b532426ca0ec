"""Data models for attack configuration, benchmark records and leaderboards."""

import json
import math
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_serializer,
    model_validator,
)


def _utc_now() -> datetime:
    """Get current UTC time."""
    return datetime.now(timezone.utc)


class Norm(str, Enum):
    """Threat-model norms."""

    L0 = "l0"
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def order(self) -> float:
        """Order as accepted by numpy.linalg.norm."""
        return {"l0": 0, "l1": 1, "l2": 2, "linf": math.inf}[self.value]


class AttackMode(str, Enum):
    MIN_NORM = "min_norm"
    FIXED_BUDGET = "fixed_budget"


class LossKind(str, Enum):
    LOGIT = "logit"
    SOFTMAX = "softmax"
    NCE = "nce"
    DL = "dl"
    DLR = "dlr"


class InitKind(str, Enum):
    ZERO = "zero"
    RANDOM = "random"
    ADV = "adv"


class DirectionKind(str, Enum):
    GRAD = "grad"
    NORM = "norm"
    PROJ = "proj"


class OptimizerKind(str, Enum):
    GD = "gd"
    MOMENTUM = "momentum"
    ADAM = "adam"


class SchedulerKind(str, Enum):
    FIXED = "fixed"
    LIN = "lin"
    COS = "cos"
    EXP = "exp"
    ROP = "rop"
    POLY = "poly"


class HeuristicKind(str, Enum):
    """Outer MinNorm strategies layered on the unified loop."""

    NONE = "none"
    DDN = "ddn"  # grow/shrink an ℓ2 sphere
    FMN = "fmn"  # boundary-tracking ε with ball projection
    PENALTY = "penalty"  # CW-style ‖δ‖₂² + c·loss with a grid over c


class _KindSpec(BaseModel):
    """Component spec that also accepts a bare kind string."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _from_kind_string(cls, data: Any) -> Any:
        if isinstance(data, str):
            return {"kind": data}
        return data


class InitSpec(_KindSpec):
    kind: InitKind = InitKind.ZERO
    radius: float = Field(default=0.0, ge=0.0)


class OptimizerSpec(_KindSpec):
    kind: OptimizerKind = OptimizerKind.GD
    beta: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)


class SchedulerSpec(_KindSpec):
    kind: SchedulerKind = SchedulerKind.FIXED
    gamma: float = Field(default=0.99, gt=0.0, lt=1.0)
    final_step_size: Optional[float] = Field(default=None, ge=0.0)  # α_K for cos/poly
    patience: int = Field(default=10, ge=1)
    factor: float = Field(default=0.5, gt=0.0, lt=1.0)
    power: float = Field(default=2.0, gt=0.0)


class HeuristicSpec(_KindSpec):
    kind: HeuristicKind = HeuristicKind.NONE
    gamma: float = Field(default=0.05, gt=0.0, lt=1.0)
    gamma_final: float = Field(default=0.001, gt=0.0, lt=1.0)
    init_radius: float = Field(default=1.0, gt=0.0)
    penalty_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)


DEFAULT_EPS_INIT: dict[Norm, float] = {
    Norm.L0: 100.0,
    Norm.L1: 10.0,
    Norm.L2: 1.0,
    Norm.LINF: 1.0 / 255.0,
}


class SearchConfig(BaseModel):
    """ε search used to run FixedBudget attacks as minimum-norm procedures."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    steps: int = Field(default=10, ge=2)
    eps_init: dict[Norm, float] = Field(default_factory=lambda: dict(DEFAULT_EPS_INIT))

    @field_validator("eps_init")
    @classmethod
    def _positive(cls, value: dict[Norm, float]) -> dict[Norm, float]:
        if any(eps <= 0 for eps in value.values()):
            raise ValueError("eps_init values must be positive")
        return value

    def initial_epsilon(self, norm: Norm) -> float:
        return self.eps_init.get(norm, DEFAULT_EPS_INIT[norm])


class AttackConfig(BaseModel):
    """One attack: the five component slots, threat model and hyperparameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: Optional[str] = None
    mode: AttackMode = AttackMode.MIN_NORM
    p: Norm
    loss: LossKind = LossKind.NCE
    init: InitSpec = InitSpec()
    direction: DirectionKind = DirectionKind.GRAD
    optimizer: OptimizerSpec = OptimizerSpec()
    scheduler: SchedulerSpec = SchedulerSpec()
    steps: int = Field(default=100, ge=1)
    step_size: float = Field(default=0.01, gt=0.0)
    margin: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)
    epsilon: Optional[float] = None
    heuristic: HeuristicSpec = HeuristicSpec()
    search: Optional[SearchConfig] = None

    @model_validator(mode="after")
    def _check_slots(self) -> "AttackConfig":
        if self.mode == AttackMode.FIXED_BUDGET and (self.epsilon is None or self.epsilon <= 0):
            raise ValueError("fixed_budget attacks need epsilon > 0")
        if self.direction == DirectionKind.PROJ and self.p == Norm.L0:
            raise ValueError("proj direction is not defined for l0")
        if self.heuristic.kind != HeuristicKind.NONE and self.mode != AttackMode.MIN_NORM:
            raise ValueError(f"{self.heuristic.kind.value} heuristic requires min_norm mode")
        if self.heuristic.kind == HeuristicKind.DDN and self.p != Norm.L2:
            raise ValueError("ddn heuristic is defined for l2 only")
        if self.heuristic.kind == HeuristicKind.PENALTY and self.p != Norm.L2:
            raise ValueError("penalty heuristic is defined for l2 only")
        return self

    @property
    def label(self) -> str:
        return self.name or f"{self.mode.value}-{self.p.value}"


class SampleResult(BaseModel):
    """Per-sample outcome of one benchmark run."""

    distance: Optional[float] = Field(default=None, ge=0.0)
    forwards: int = Field(ge=0)
    backwards: int = Field(ge=0)
    time_s: float = Field(default=0.0, ge=0.0)
    error: Optional[str] = None
    returned_distance: Optional[float] = Field(default=None, ge=0.0)

    @property
    def queries(self) -> int:
        return self.forwards + self.backwards

    @model_serializer(mode="wrap")
    def _drop_empty_notes(self, handler):
        data = handler(self)
        for key in ("error", "returned_distance"):
            if data.get(key) is None:
                data.pop(key, None)
        return data


class RecordMeta(BaseModel):
    """Environment metadata; excluded from reproducibility comparisons."""

    timestamp: datetime = Field(default_factory=_utc_now)
    host: str = ""


class AttackRecord(BaseModel):
    """Output of one attack run against one model, keyed by sample hash."""

    schema_version: int = 1
    attack: str
    model: str
    norm: Norm
    budget: int = Field(ge=1)
    search: Optional[SearchConfig] = None
    records: dict[str, SampleResult]
    meta: RecordMeta = Field(default_factory=RecordMeta)

    @model_validator(mode="after")
    def _within_budget(self) -> "AttackRecord":
        for sample_hash, result in self.records.items():
            if result.queries > self.budget:
                raise ValueError(
                    f"{sample_hash}: {result.queries} queries exceed budget {self.budget}"
                )
        return self

    @property
    def hashes(self) -> frozenset[str]:
        return frozenset(self.records)

    def to_json(self) -> str:
        """Stable JSON: sorted keys, hashes in lexicographic order."""
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


class LeaderboardEntry(BaseModel):
    """One ranked attack; serialised with the key `GO` for global optimality."""

    model_config = ConfigDict(populate_by_name=True)

    attack: str
    go: float = Field(alias="GO")
    asr: float
    lo: dict[str, float]
    mean_forwards: float
    mean_backwards: float
    mean_time_s: float
    mean_distance: Optional[float] = None
    median_distance: Optional[float] = None

    @property
    def mean_queries(self) -> float:
        return self.mean_forwards + self.mean_backwards


class Board(BaseModel):
    """Ranking for one threat-model norm over a set of models."""

    norm: Norm
    models: list[str]
    entries: list[LeaderboardEntry]


class Leaderboard(BaseModel):
    schema_version: int = 1
    boards: list[Board] = Field(default_factory=list)

    def board(self, norm: Norm) -> Optional[Board]:
        return next((b for b in self.boards if b.norm == norm), None)


class ZooEntry(BaseModel):
    id: str
    file: str
    hidden: list[int]
    adversarial: Optional[str] = None
    epsilon: Optional[float] = None
    seed: int
    train_accuracy: float
    sha512: str


class ZooManifest(BaseModel):
    dataset: str
    seed: int
    models: list[ZooEntry]
