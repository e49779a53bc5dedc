from .run import ExperimentRun, RunStatus
from .group import GroupRecord
from .recommendation import RecommendationRecord

# Export all models for easy importing
__all__ = ["ExperimentRun", "RunStatus", "GroupRecord", "RecommendationRecord"]
