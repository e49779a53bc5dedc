from .groups import GroupFormation, make_groups
from .holdout import holdout_split
from .metrics import HeldOutRelevance, dcg, group_dcg, psr

__all__ = [
    "GroupFormation",
    "HeldOutRelevance",
    "dcg",
    "group_dcg",
    "holdout_split",
    "make_groups",
    "psr",
]
