"""Shared vocabulary: tasks, schema metadata, tables, episode state, observations, rewards.

Cell values are plain Python scalars: None, bool, int, float, str, bytes.
NaN floats are normalized to None at ingestion so every downstream consumer
can treat None as the single missing-value marker.
"""
from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

Cell = Any  # None | bool | int | float | str | bytes


class Dialect(str, Enum):
    SQLITE = "sqlite"
    POSTGRESQL = "postgresql"


class CellType(str, Enum):
    NULL = "null"
    BOOL = "bool"
    INTEGER = "integer"
    REAL = "real"
    TEXT = "text"
    BLOB = "blob"


class ObservationClass(str, Enum):
    OVERVIEW = "Overview"
    EXPLORATION_RESULT = "ExplorationResult"
    INTERMEDIATE_CTE_INFO = "IntermediateCteInfo"
    ERROR_FEEDBACK = "ErrorFeedback"


OBSERVATION_TAGS = {
    ObservationClass.OVERVIEW: "[OVERVIEW]",
    ObservationClass.EXPLORATION_RESULT: "[EXPLORATION]",
    ObservationClass.INTERMEDIATE_CTE_INFO: "[CTE]",
    ObservationClass.ERROR_FEEDBACK: "[ERROR]",
}


class TableRelationKind(str, Enum):
    EQUIVALENT = "Equivalent"
    SUBSET = "Subset"
    SUPERSET = "Superset"
    OTHER = "Other"
    NOT_CHECKED = "NotChecked"


class EpisodeStatus(str, Enum):
    SOLVED = "Solved"
    STEP_LIMIT = "StepLimit"
    ABANDONED = "Abandoned"


def normalize_ingested(v: Cell) -> Cell:
    """Normalize a raw engine cell: NaN reals become None."""
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def cell_kind(v: Cell) -> CellType:
    if v is None:
        return CellType.NULL
    if isinstance(v, bool):
        return CellType.BOOL
    if isinstance(v, int):
        return CellType.INTEGER
    if isinstance(v, float):
        return CellType.REAL
    if isinstance(v, bytes):
        return CellType.BLOB
    return CellType.TEXT


def infer_column_type(cells: list[Cell]) -> CellType:
    """Narrowest type consistent with all non-None cells.

    Bool stays bool only if every cell is bool; mixed int/real widens to real;
    bool mixes with int/real as a numeric; any other mix widens to text.
    """
    kinds = {cell_kind(c) for c in cells if c is not None}
    if not kinds:
        return CellType.NULL
    if len(kinds) == 1:
        return kinds.pop()
    numeric = {CellType.BOOL, CellType.INTEGER, CellType.REAL}
    if kinds <= numeric:
        if CellType.REAL in kinds:
            return CellType.REAL
        return CellType.INTEGER
    return CellType.TEXT


def cell_to_json(v: Cell) -> Any:
    if isinstance(v, bytes):
        return {"$blob": base64.b64encode(v).decode("ascii")}
    return v


def cell_from_json(v: Any) -> Cell:
    if isinstance(v, dict) and "$blob" in v:
        return base64.b64decode(v["$blob"])
    return v


@dataclass(frozen=True)
class ColumnInfo:
    name: str
    declared_type: str
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    table: str
    column: str
    ref_table: str
    ref_column: str


@dataclass(frozen=True)
class TableInfo:
    name: str
    columns: tuple[ColumnInfo, ...]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class SchemaInfo:
    tables: tuple[TableInfo, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()

    def find_table(self, name: str) -> Optional[TableInfo]:
        lowered = name.lower()
        for t in self.tables:
            if t.name.lower() == lowered:
                return t
        return None

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]


@dataclass(frozen=True)
class Task:
    task_id: str
    db_ref: str
    dialect: Dialect
    question: str
    gold_sql: str
    initial_sql: Optional[str] = None
    evidence: Optional[str] = None

    @property
    def is_remediation(self) -> bool:
        return self.initial_sql is not None


@dataclass
class ResultTable:
    columns: list[tuple[str, CellType]]
    rows: list[tuple[Cell, ...]]
    truncated: bool = False

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(
                    f"row width {len(r)} does not match {len(self.columns)} columns"
                )

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def to_json(self) -> dict:
        return {
            "columns": [{"name": n, "type": t.value} for n, t in self.columns],
            "rows": [[cell_to_json(c) for c in row] for row in self.rows],
            "truncated": self.truncated,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ResultTable":
        return cls(
            columns=[(c["name"], CellType(c["type"])) for c in data["columns"]],
            rows=[tuple(cell_from_json(c) for c in row) for row in data["rows"]],
            truncated=data.get("truncated", False),
        )

    @classmethod
    def from_rows(cls, names: list[str], rows: list[tuple], truncated: bool = False) -> "ResultTable":
        normalized = [tuple(normalize_ingested(c) for c in row) for row in rows]
        columns = []
        for i, name in enumerate(names):
            columns.append((name, infer_column_type([r[i] for r in normalized])))
        return cls(columns=columns, rows=normalized, truncated=truncated)


@dataclass
class Observation:
    klass: ObservationClass
    text: str
    structured: Optional[dict] = None

    def __post_init__(self) -> None:
        tag = OBSERVATION_TAGS[self.klass]
        if not self.text.startswith(tag):
            self.text = tag + "\n" + self.text

    def to_json(self) -> dict:
        return {"klass": self.klass.value, "text": self.text, "structured": self.structured}

    @classmethod
    def from_json(cls, data: dict) -> "Observation":
        return cls(ObservationClass(data["klass"]), data["text"], data.get("structured"))


@dataclass
class RewardSignal:
    value: float
    relation: TableRelationKind

    def to_json(self) -> dict:
        return {"value": self.value, "relation": self.relation.value}

    @classmethod
    def from_json(cls, data: dict) -> "RewardSignal":
        return cls(data["value"], TableRelationKind(data["relation"]))


@dataclass
class CteEntry:
    cte_id: str
    source_op: Optional[Any]  # ActionCommand; None for a remediation seed
    sql_text: str
    parent_ids: list[str]
    cached_preview: Optional[ResultTable] = None
    cached_row_count: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "cte_id": self.cte_id,
            "sql_text": self.sql_text,
            "parent_ids": list(self.parent_ids),
            "cached_row_count": self.cached_row_count,
        }


@dataclass
class EpisodeState:
    task: Task
    schema: SchemaInfo
    ctes: list[CteEntry] = field(default_factory=list)
    step_count: int = 0
    partial_reward_granted: bool = False
    terminated: bool = False
    truncated: bool = False
    seed: int = 0

    @property
    def over(self) -> bool:
        return self.terminated or self.truncated

    def find_cte(self, cte_id: str) -> Optional[CteEntry]:
        for c in self.ctes:
            if c.cte_id == cte_id:
                return c
        return None

    def registry_snapshot(self) -> str:
        """Serialized registry view used by immutability checks."""
        return json.dumps(
            {
                "ctes": [c.to_json() for c in self.ctes],
                "partial_reward_granted": self.partial_reward_granted,
                "terminated": self.terminated,
                "truncated": self.truncated,
            },
            sort_keys=True,
        )


def next_cte_id(state: EpisodeState) -> str:
    return f"T_{len(state.ctes)}"


@dataclass
class TrajectoryStep:
    step_index: int
    raw_action_text: str
    observation: Observation
    reward: RewardSignal
    wall_ms: int

    def to_json(self) -> dict:
        return {
            "step_index": self.step_index,
            "raw_action_text": self.raw_action_text,
            "observation": self.observation.to_json(),
            "reward": self.reward.to_json(),
            "wall_ms": self.wall_ms,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrajectoryStep":
        return cls(
            step_index=data["step_index"],
            raw_action_text=data["raw_action_text"],
            observation=Observation.from_json(data["observation"]),
            reward=RewardSignal.from_json(data["reward"]),
            wall_ms=data["wall_ms"],
        )


@dataclass
class TrajectoryRecord:
    task_id: str
    seed: int
    steps: list[TrajectoryStep] = field(default_factory=list)
    status: EpisodeStatus = EpisodeStatus.ABANDONED
    lineage: list[dict] = field(default_factory=list)  # [{"cte_id", "parent_ids"}]

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "seed": self.seed,
            "steps": [s.to_json() for s in self.steps],
            "status": self.status.value,
            "lineage": self.lineage,
        }

    def to_jsonl_line(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def from_json(cls, data: dict) -> "TrajectoryRecord":
        return cls(
            task_id=data["task_id"],
            seed=data["seed"],
            steps=[TrajectoryStep.from_json(s) for s in data["steps"]],
            status=EpisodeStatus(data["status"]),
            lineage=data.get("lineage", []),
        )
