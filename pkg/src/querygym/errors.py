"""Error taxonomy shared across parsing, compilation, and execution."""
from __future__ import annotations

from typing import Optional


class QueryGymError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "E_INTERNAL"

    def __init__(self, message: str, usage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.usage = usage


class ParseError(QueryGymError):
    code = "E_PARSE"


class UnknownActionError(QueryGymError):
    code = "E_UNKNOWN_ACTION"


class ArityError(QueryGymError):
    code = "E_ARITY"


class ShapeError(QueryGymError):
    code = "E_SHAPE"


class JoinArityError(QueryGymError):
    code = "E_JOIN_ARITY"


class UnknownTableError(QueryGymError):
    code = "E_UNKNOWN_TABLE"


class UnknownColumnError(QueryGymError):
    code = "E_UNKNOWN_COLUMN"


class FragmentSemicolonError(QueryGymError):
    code = "E_FRAGMENT_SEMICOLON"


class BadJoinTypeError(QueryGymError):
    code = "E_BAD_JOIN_TYPE"


class BadLimitError(QueryGymError):
    code = "E_BAD_LIMIT"


class BadUnionModeError(QueryGymError):
    code = "E_BAD_UNION_MODE"


class UnionWidthError(QueryGymError):
    code = "E_UNION_WIDTH"


class TruncatedComparisonError(QueryGymError):
    code = "E_TRUNCATED_COMPARISON"


class EpisodeOverError(QueryGymError):
    code = "E_EPISODE_OVER"


class TaskInvalidError(QueryGymError):
    code = "E_TASK_INVALID"


class ManifestError(QueryGymError):
    code = "E_MANIFEST"


class DatabaseMissingError(QueryGymError):
    code = "E_DB_MISSING"


class BadTrajectoryError(QueryGymError):
    code = "E_BAD_TRAJECTORY"
