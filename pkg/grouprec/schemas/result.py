from typing import List, Optional

from pydantic import BaseModel, Field


class RecommendationResult(BaseModel):
    """Ordered selection of one optimizer or baseline run."""

    algorithm: str
    selected: List[int]
    gains: List[float] = Field(default_factory=list)
    objective: float = 0.0
    # 1 - (1 - 1/k)^k for greedy runs
    certificate: Optional[float] = None
    # sum of the k largest singleton gains; an upper bound on the optimum
    online_bound: Optional[float] = None
    evaluations: int = 0

    def prefix(self, k: int) -> List[int]:
        return self.selected[:k]
