# Pydantic schemas package
from .config import (
    ALGORITHMS,
    ConsensusConfig,
    EvalConfig,
    ExperimentConfig,
    FactorizationConfig,
    GroupSpec,
    SaturationSpec,
)
from .result import RecommendationResult

__all__ = [
    "ALGORITHMS",
    "ConsensusConfig",
    "EvalConfig",
    "ExperimentConfig",
    "FactorizationConfig",
    "GroupSpec",
    "RecommendationResult",
    "SaturationSpec",
]
