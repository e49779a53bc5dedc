from sqlmodel import SQLModel, Field, Relationship
from typing import Optional
from uuid import uuid4


class RecommendationRecord(SQLModel, table=True):
    """One ranked item of an algorithm's list for a group.

    ``gamma`` is set for consensus runs, ``param`` holds the FM lambda.
    """
    __tablename__ = "recommendations"

    id: str = Field(default_factory=lambda: str(uuid4()), primary_key=True)
    group_id: str = Field(index=True, foreign_key="groups.id")
    repetition: int = Field(index=True)
    algorithm: str
    gamma: Optional[float] = None
    param: Optional[float] = None
    rank: int
    item_id: int
    marginal_gain: Optional[float] = None

    group: Optional["GroupRecord"] = Relationship(back_populates="recommendations")
