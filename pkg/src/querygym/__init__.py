"""Interactive POMDP environment for LLM query-planning agents."""

from .actions import ActionCommand, ActionKind, ActionSpec, catalog, parse_action
from .env import EnvConfig, Environment, StepResult
from .equivalence import TableRelation, align_and_compare
from .model import (
    Dialect,
    EpisodeState,
    Observation,
    ObservationClass,
    ResultTable,
    RewardSignal,
    Task,
    TableRelationKind,
    TrajectoryRecord,
)

__all__ = [
    "ActionCommand",
    "ActionKind",
    "ActionSpec",
    "catalog",
    "parse_action",
    "EnvConfig",
    "Environment",
    "StepResult",
    "TableRelation",
    "align_and_compare",
    "Dialect",
    "EpisodeState",
    "Observation",
    "ObservationClass",
    "ResultTable",
    "RewardSignal",
    "Task",
    "TableRelationKind",
    "TrajectoryRecord",
]

__version__ = "0.1.0"
