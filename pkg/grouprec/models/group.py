from sqlmodel import SQLModel, Field, Relationship
from typing import List, Tuple


class GroupRecord(SQLModel, table=True):
    """A formed group of one repetition; members are dense user ids."""
    __tablename__ = "groups"

    # r{repetition}-{kind}-{size}-{position}
    id: str = Field(primary_key=True)
    repetition: int = Field(index=True)
    kind: str
    size: int
    position: int
    members: str

    recommendations: List["RecommendationRecord"] = Relationship(back_populates="group")

    @staticmethod
    def make_id(repetition: int, kind: str, size: int, position: int) -> str:
        return f"r{repetition}-{kind}-{size}-{position:04d}"

    def member_ids(self) -> Tuple[int, ...]:
        return tuple(int(u) for u in self.members.split(","))
