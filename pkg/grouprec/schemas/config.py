from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .. import config

# saga variants are (item_fn, user_fn) presets; the rest rank predicted scores
SAGA_VARIANTS = {
    "saga-linear": ("log1p", "identity"),
    "saga-concave": ("log1p", "sqrt"),
}
AGGREGATORS = ("am", "fm", "lm", "mp", "plurality")
ALGORITHMS = tuple(SAGA_VARIANTS) + AGGREGATORS


class FactorizationConfig(BaseModel):
    """Weighted-regularized non-negative ALS settings."""

    model_config = ConfigDict(extra="forbid")

    d: int = Field(config.DEFAULT_DIM, ge=1)
    reg: float = Field(0.1, gt=0)
    max_iters: int = Field(50, ge=1)
    tol: float = Field(1e-6, ge=0)
    seed: int = 0


class SaturationSpec(BaseModel):
    """Item saturation f and user saturation g_u."""

    model_config = ConfigDict(extra="forbid")

    item_fn: Literal["identity", "log1p"] = "log1p"
    user_fn: Literal["identity", "sqrt", "scaled_identity"] = "identity"
    # t_u per user id, only read by scaled_identity
    transport_times: Optional[Dict[int, float]] = None

    @model_validator(mode="after")
    def _check_transport_times(self):
        if self.user_fn == "scaled_identity":
            if not self.transport_times:
                raise ValueError("scaled_identity needs transport_times")
            if any(t <= 0 for t in self.transport_times.values()):
                raise ValueError("transport times must be positive")
        return self

    @property
    def modular(self) -> bool:
        return self.item_fn == "identity" and self.user_fn in ("identity", "scaled_identity")


class ConsensusConfig(BaseModel):
    """Saturation choice plus the affinity parameters of one SAGA run."""

    model_config = ConfigDict(extra="forbid")

    saturation: SaturationSpec = Field(default_factory=SaturationSpec)
    gamma: float = Field(1.0, gt=0)
    user_affinity: Literal["cosine", "indicator", "identity"] = "cosine"


class GroupSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["random", "similar"] = "random"
    size: int = Field(4, ge=2)
    count: Optional[int] = Field(None, ge=1)
    sim_threshold: float = config.DEFAULT_SIM_THRESHOLD
    seed: int = 0
    # rejection sampling budget for similar groups
    max_attempts: int = Field(50, ge=1)
    max_draws: int = Field(500, ge=1)

    def resolved_count(self) -> int:
        if self.count is not None:
            return self.count
        return config.GROUP_COUNTS[self.kind].get(self.size, 50)


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    holdout_frac: float = Field(config.DEFAULT_HOLDOUT_FRAC, gt=0, lt=1)
    repetitions: int = Field(config.DEFAULT_REPETITIONS, ge=1)
    k_list: List[int] = Field(default_factory=lambda: list(range(1, 11)))
    relevance_threshold: float = config.DEFAULT_RELEVANCE_THRESHOLD
    beta: float = Field(config.DEFAULT_BETA, gt=0, lt=1)
    dcg_log_base: float = Field(2.0, gt=1)

    @field_validator("k_list")
    @classmethod
    def _check_k_list(cls, value: List[int]) -> List[int]:
        if not value or any(k < 1 for k in value):
            raise ValueError("k_list needs positive values")
        return sorted(set(value))


def _default_groups() -> List[GroupSpec]:
    return [GroupSpec(kind="random", size=size) for size in (2, 4, 6, 8)]


class ExperimentConfig(BaseModel):
    """Fully resolved configuration of an offline experiment."""

    model_config = ConfigDict(extra="forbid")

    dataset: Optional[str] = None
    format: Literal["movielens-dat", "csv"] = "movielens-dat"
    min_ratings: int = Field(config.DEFAULT_MIN_RATINGS, ge=0)
    factorization: FactorizationConfig = Field(default_factory=FactorizationConfig)
    groups: List[GroupSpec] = Field(default_factory=_default_groups)
    evaluation: EvalConfig = Field(default_factory=EvalConfig)
    gamma_grid: List[float] = Field(default_factory=lambda: list(config.GAMMA_GRID))
    lambda_grid: List[float] = Field(default_factory=lambda: list(config.LAMBDA_GRID))
    algorithms: List[str] = Field(default_factory=lambda: ["saga-linear", "saga-concave", "am", "fm"])
    user_affinity: Literal["cosine", "indicator", "identity"] = "cosine"
    select_by: Literal["dcg", "psr"] = "dcg"
    out: str = str(config.WORKDIR)
    seed: int = config.MASTER_SEED

    @field_validator("algorithms")
    @classmethod
    def _check_algorithms(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}, expected {list(ALGORITHMS)}")
        return value

    @field_validator("groups")
    @classmethod
    def _check_groups(cls, value: List[GroupSpec]) -> List[GroupSpec]:
        cells = [(spec.kind, spec.size) for spec in value]
        if not cells or len(set(cells)) != len(cells):
            raise ValueError("groups need at least one spec and unique (kind, size) pairs")
        return value

    @field_validator("gamma_grid")
    @classmethod
    def _check_gamma(cls, value: List[float]) -> List[float]:
        if not value or any(g <= 0 for g in value):
            raise ValueError("gamma values must be positive")
        return value

    @field_validator("lambda_grid")
    @classmethod
    def _check_lambda(cls, value: List[float]) -> List[float]:
        if not value or any(not 0 <= lam <= 1 for lam in value):
            raise ValueError("lambda values must lie in [0, 1]")
        return value
