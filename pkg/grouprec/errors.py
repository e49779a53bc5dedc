from typing import Any


class GroupRecError(Exception):
    """Base error for the group recommender.

    Carries a human readable ``detail`` and the process ``exit_code`` the CLI
    returns when the error reaches the top level.
    """

    exit_code = 1

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.detail
        extra = ", ".join(f"{key}={value!r}" for key, value in self.context.items())
        return f"{self.detail} ({extra})"


class RatingsError(GroupRecError):
    exit_code = 2


class IngestError(GroupRecError):
    exit_code = 2


class FactorizationError(GroupRecError):
    exit_code = 3


class ConsensusStateError(GroupRecError):
    exit_code = 4


class OptimizerError(GroupRecError):
    exit_code = 4


class BaselineError(GroupRecError):
    exit_code = 4


class EvaluationError(GroupRecError):
    exit_code = 5


class MissingArtifactError(GroupRecError):
    """Raised when a stage runs before the stage that produces its inputs."""

    exit_code = 6

    def __init__(self, artifact: str, stage: str):
        super().__init__(f"Missing artifact {artifact}: run stage '{stage}' first", artifact=artifact)
        self.stage = stage
