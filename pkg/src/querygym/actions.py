"""Action catalog and parser.

Agents emit one JSON-ish array per turn, e.g. `Action: ["perform_filter", "T_0",
"T_0.year = 2021"]`. The parser is deliberately tolerant: it accepts a leading
`Action:` prefix, surrounding prose, single-quoted strings, and bare tokens,
then validates the action name, arity, and argument shapes against the catalog.
Table/column existence is NOT checked here; that belongs to compilation.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .errors import (
    ArityError,
    JoinArityError,
    ParseError,
    ShapeError,
    UnknownActionError,
)

Arg = Union[str, list[str]]


class ActionKind(str, Enum):
    EXPLORATION = "Exploration"
    RELATIONAL_ALGEBRA = "RelationalAlgebra"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: str  # "string" | "list"


@dataclass(frozen=True)
class ActionSpec:
    name: str
    kind: ActionKind
    required_params: tuple[ParamSpec, ...]
    optional_params: tuple[ParamSpec, ...]
    description: str
    usage: str

    @property
    def min_args(self) -> int:
        return len(self.required_params)

    @property
    def max_args(self) -> int:
        return len(self.required_params) + len(self.optional_params)

    def all_params(self) -> tuple[ParamSpec, ...]:
        return self.required_params + self.optional_params


def _s(name: str) -> ParamSpec:
    return ParamSpec(name, "string")


def _l(name: str) -> ParamSpec:
    return ParamSpec(name, "list")


_E = ActionKind.EXPLORATION
_R = ActionKind.RELATIONAL_ALGEBRA

CATALOG: tuple[ActionSpec, ...] = (
    ActionSpec("get_overview", _E, (), (),
               "Get an overview of the task.",
               'Action: ["get_overview"]'),
    ActionSpec("get_query", _E, (), (),
               "Get the user query.",
               'Action: ["get_query"]'),
    ActionSpec("get_schema", _E, (), (),
               "Get the schema.",
               'Action: ["get_schema"]'),
    ActionSpec("get_tables", _E, (), (),
               "Get a list of tables in the database.",
               'Action: ["get_tables"]'),
    ActionSpec("get_columns", _E, (_s("table_id"),), (),
               "Get a list of columns in a given table.",
               'Action: ["get_columns", "<table_id>"]'),
    ActionSpec("get_actions", _E, (), (),
               "Get a list of actions.",
               'Action: ["get_actions"]'),
    ActionSpec("get_operations", _E, (), (),
               "Get a list of operations.",
               'Action: ["get_operations"]'),
    ActionSpec("preview_table", _E, (_s("table_id"),), (),
               "Preview the first 5 rows of a table.",
               'Action: ["preview_table", "<table_id>"]'),
    ActionSpec("get_column_stats", _E, (_s("table_id"), _s("column_id")), (),
               "Get descriptive statistics of a column, it include the central "
               "tendency, dispersion and shape of a dataset's distribution, "
               "excluding NaN values.",
               'Action: ["get_column_stats", "<table_id>", "<column_id>"]'),
    ActionSpec("get_unique_values", _E, (_s("table_id"), _s("column_id")), (),
               "Get unique values from a specified column in a table.",
               'Action: ["get_unique_values", "<table_id>", "<column_id>"]'),
    ActionSpec("get_column_types", _E, (_s("table_id"),), (),
               "Preview the data types of all columns in a table.",
               'Action: ["get_column_types", "<table_id>"]'),
    ActionSpec("get_sample_values", _E, (_s("table_id"), _s("column_id")), (),
               "Get sample values from a specific column.",
               'Action: ["get_sample_values", "<table_id>", "<column_id>"]'),
    ActionSpec("perform_projection", _R, (_s("table_id"), _s("columns")), (),
               "Project columns from a table.",
               'Action: ["perform_projection", "<table_id>", "<columns>"]'),
    ActionSpec("perform_filter", _R, (_s("table_id"), _s("conditions")),
               (_s("projected_columns"),),
               "Filter rows from a table based on some condition.",
               'Action: ["perform_filter", "<table_id>", "<conditions>", '
               '"[projected columns]"]'),
    ActionSpec("perform_join", _R,
               (_l("tables"), _l("conditions"), _l("join_types"),
                _s("projected_columns")), (),
               "This action joins two tables based on a condition. When "
               "executing this action, remember to follow the exact format "
               "provided in usage.",
               'Action: ["perform_join", "<list-of-tables>", '
               '"<list-of-join-conditions>", "<list-of-join-type>", '
               '"<projected columns>"]'),
    ActionSpec("perform_order_by", _R, (_s("table_id"), _s("order_condition")),
               (_s("projected_columns"),),
               "Order table entities based on a condition.",
               'Action: ["perform_order_by", "<table-id>", "<order-condition>", '
               '"[projected columns]"]'),
    ActionSpec("perform_limit", _R, (_s("table_id"), _s("limit")),
               (_s("projected_columns"),),
               "Limit the table rows based on a condition.",
               'Action: ["perform_limit", "<table-id>", "<integer>", '
               '"[projected columns]"]'),
    ActionSpec("perform_aggregate", _R,
               (_s("table_id"), _s("group_columns"), _s("projected_columns")),
               (_s("having_condition"),),
               "Used when results are to be aggregated or grouped by some column.",
               'Action: ["perform_aggregate", "<table-id>", "<column-id>", '
               '"<projected columns>", "[having-condition]"]'),
    ActionSpec("perform_union", _R,
               (_s("mode"), _s("table_1"), _s("table_2")),
               (_s("table_1_columns"), _s("table_2_columns")),
               "Used to union two tables.",
               'Action: ["perform_union", "ALL|DISTINCT", "<table-1-id>", '
               '"<table-2-id>", "[table-1-columns]", "[table-2-columns]"]'),
    ActionSpec("perform_intersect", _R,
               (_s("table_1"), _s("table_2")),
               (_s("table_1_columns"), _s("table_2_columns")),
               "Used to intersect two tables.",
               'Action: ["perform_intersect", "<table-1-id>", "<table-2-id>", '
               '"[table-1-columns]", "[table-2-columns]"]'),
)

_BY_NAME = {spec.name: spec for spec in CATALOG}


def catalog() -> tuple[ActionSpec, ...]:
    return CATALOG


def spec_for(name: str) -> Optional[ActionSpec]:
    return _BY_NAME.get(name.lower())


@dataclass(frozen=True)
class ActionCommand:
    name: str
    args: tuple[Arg, ...]
    raw_text: str

    @property
    def spec(self) -> ActionSpec:
        return _BY_NAME[self.name]

    @property
    def kind(self) -> ActionKind:
        return self.spec.kind

    def arg(self, param_name: str) -> Optional[Arg]:
        """Argument bound to the named catalog parameter, None when absent."""
        for i, p in enumerate(self.spec.all_params()):
            if p.name == param_name:
                if i < len(self.args):
                    v = self.args[i]
                    if isinstance(v, str) and v.strip() == "":
                        return None
                    return v
                return None
        return None

    def as_array(self) -> list:
        return [self.name] + [list(a) if isinstance(a, list) else a for a in self.args]


# --- tolerant array scanner -------------------------------------------------

def _scan_string(text: str, i: int) -> tuple[str, int]:
    quote = text[i]
    i += 1
    out = []
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            out.append(text[i + 1])
            i += 2
            continue
        if ch == quote:
            return "".join(out), i + 1
        out.append(ch)
        i += 1
    raise ParseError("unterminated string in action array")


def _scan_array(text: str, i: int) -> tuple[list, int]:
    assert text[i] == "["
    i += 1
    items: list = []
    pending = False  # a bare token is being accumulated
    bare: list[str] = []

    def flush_bare():
        nonlocal pending, bare
        if pending:
            token = "".join(bare).strip()
            if token:
                items.append(token)
            pending = False
            bare = []

    while i < len(text):
        ch = text[i]
        if ch in "\"'`" and not pending:
            s, i = _scan_string(text, i)
            items.append(s)
            continue
        if ch == "[":
            sub, i = _scan_array(text, i)
            items.append(sub)
            continue
        if ch == "]":
            flush_bare()
            return items, i + 1
        if ch == ",":
            flush_bare()
            i += 1
            continue
        if ch.isspace():
            if pending:
                bare.append(ch)
            i += 1
            continue
        pending = True
        bare.append(ch)
        i += 1
    raise ParseError("unterminated action array")


def extract_first_array(text: str) -> list:
    """First well-formed bracketed array anywhere in the text."""
    start = 0
    while True:
        idx = text.find("[", start)
        if idx < 0:
            raise ParseError("no action array found in input")
        try:
            arr, _ = _scan_array(text, idx)
            return arr
        except ParseError:
            start = idx + 1


def parse_action(text: str) -> ActionCommand:
    arr = extract_first_array(text)
    if not arr:
        raise ParseError("empty action array")
    head = arr[0]
    if not isinstance(head, str):
        raise ParseError("action name must be a string")
    spec = spec_for(head)
    if spec is None:
        raise UnknownActionError(f"unknown action {head!r}")
    usage = spec.usage

    raw_args = arr[1:]
    if len(raw_args) < spec.min_args:
        raise ArityError(
            f"{spec.name} requires at least {spec.min_args} argument(s), "
            f"got {len(raw_args)}",
            usage=usage,
        )
    if len(raw_args) > spec.max_args:
        raise ArityError(
            f"{spec.name} accepts at most {spec.max_args} argument(s), "
            f"got {len(raw_args)}",
            usage=usage,
        )

    args: list[Arg] = []
    for value, param in zip(raw_args, spec.all_params()):
        if param.shape == "list":
            if not isinstance(value, list):
                raise ShapeError(
                    f"parameter {param.name!r} of {spec.name} must be a list",
                    usage=usage,
                )
            flat: list[str] = []
            for item in value:
                if isinstance(item, list):
                    raise ShapeError(
                        f"parameter {param.name!r} of {spec.name} must be a "
                        f"flat list of strings",
                        usage=usage,
                    )
                flat.append(str(item))
            args.append(flat)
        else:
            if isinstance(value, list):
                raise ShapeError(
                    f"parameter {param.name!r} of {spec.name} must be a string",
                    usage=usage,
                )
            args.append(str(value))

    cmd = ActionCommand(spec.name, tuple(args), text)

    if spec.name == "perform_join":
        tables = cmd.arg("tables") or []
        conds = cmd.arg("conditions") or []
        jtypes = cmd.arg("join_types") or []
        if len(tables) < 2:
            raise JoinArityError(
                "perform_join needs at least 2 tables", usage=usage)
        if len(conds) != len(tables) - 1 or len(jtypes) != len(tables) - 1:
            raise JoinArityError(
                f"{len(tables)} tables require exactly {len(tables) - 1} join "
                f"conditions and join types (got {len(conds)} and {len(jtypes)})",
                usage=usage,
            )
    return cmd


def render_actions_help(kind: Optional[ActionKind] = None) -> str:
    lines = []
    for spec in CATALOG:
        if kind is not None and spec.kind != kind:
            continue
        lines.append(f"{spec.name}:")
        lines.append(f"  description: {spec.description}")
        lines.append(f"  usage: {spec.usage}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
