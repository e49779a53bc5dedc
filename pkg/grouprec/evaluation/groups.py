import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..affinity import cosine_matrix
from ..errors import EvaluationError
from ..ratings import FeatureMatrix, Group, RatingsMatrix, build_group
from ..schemas.config import GroupSpec

logger = logging.getLogger(__name__)


@dataclass
class GroupFormation:
    spec: GroupSpec
    groups: List[Group] = field(default_factory=list)
    # similar groups that could not be completed within the retry budget
    failures: int = 0


def _random_members(rng: np.random.Generator, n_users: int, size: int) -> List[int]:
    return rng.choice(n_users, size=size, replace=False).tolist()


def _similar_members(rng: np.random.Generator, sim: np.ndarray, spec: GroupSpec) -> List[int]:
    """Rejection-sample members whose cosine to every current member exceeds the threshold."""
    n_users = sim.shape[0]
    for _ in range(spec.max_attempts):
        members = [int(rng.integers(n_users))]
        for _ in range(spec.max_draws):
            if len(members) == spec.size:
                break
            candidate = int(rng.integers(n_users))
            if candidate in members:
                continue
            if all(sim[candidate, m] > spec.sim_threshold for m in members):
                members.append(candidate)
        if len(members) == spec.size:
            return members
    return []


def make_groups(spec: GroupSpec, user_features: FeatureMatrix, ratings: RatingsMatrix) -> GroupFormation:
    """Draw ``spec.count`` groups; members carry their train ratings from ``ratings``."""
    n_users = user_features.rows
    if n_users < spec.size:
        raise EvaluationError("Not enough users for the group size", n_users=n_users, size=spec.size)

    rng = np.random.default_rng(spec.seed)
    formation = GroupFormation(spec=spec)
    sim = cosine_matrix(user_features.values) if spec.kind == "similar" else None

    for _ in range(spec.resolved_count()):
        if spec.kind == "random":
            members = _random_members(rng, n_users, spec.size)
        else:
            members = _similar_members(rng, sim, spec)
            if not members:
                formation.failures += 1
                continue
        formation.groups.append(build_group(ratings, members))

    if formation.failures:
        logger.warning(
            "Formed %d of %d similar groups of size %d (threshold %.2f)",
            len(formation.groups), spec.resolved_count(), spec.size, spec.sim_threshold,
        )
    return formation
