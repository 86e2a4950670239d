"""The 12 exploration actions and their textual rendering.

Exploration never mutates episode state; each action runs at most a couple of
read-only queries and renders a text observation. The grid format (header row,
`─` separator, `|`-delimited cells) is a stable contract: agents and the web
console both parse it.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

from . import actions as action_catalog
from .actions import ActionCommand, ActionKind
from .compiler import TableRef, compose_with_chain, resolve_table_ref
from .dialect import DialectProfile
from .errors import UnknownColumnError
from .model import (
    CellType,
    EpisodeState,
    Observation,
    ObservationClass,
    ResultTable,
    cell_to_json,
)
from .engine import ExecLimits


@dataclass(frozen=True)
class ObservationCaps:
    preview_rows: int = 5
    unique_cap: int = 20
    cell_width: int = 64
    sample_size: int = 5
    seeded_sampling: bool = True  # False: first-k values instead


def format_cell(v, width: int = 64) -> str:
    if v is None:
        text = "NULL"
    elif isinstance(v, bytes):
        text = f"<blob {len(v)}B>"
    elif isinstance(v, float):
        text = repr(v)
    else:
        text = str(v)
    if len(text) > width:
        text = text[: width - 1] + "…"
    return text


def render_grid(table: ResultTable, cell_width: int = 64) -> str:
    headers = [format_cell(n, cell_width) for n in table.column_names]
    rows = [[format_cell(c, cell_width) for c in row] for row in table.rows]
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    header_line = " | ".join(h.ljust(w) for h, w in zip(headers, widths))
    sep = "─" * len(header_line)
    lines = [header_line, sep]
    for row in rows:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def format_number(v, sig: int = 4) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, int):
        return str(v)
    if v == 0:
        return "0"
    return f"{v:.{sig}g}"


@dataclass
class ColumnStats:
    numeric: bool
    count: int
    mean: Optional[float] = None
    std: Optional[float] = None
    min: Optional[float] = None
    p25: Optional[float] = None
    p50: Optional[float] = None
    p75: Optional[float] = None
    max: Optional[float] = None
    unique: Optional[int] = None
    top: Optional[object] = None
    freq: Optional[int] = None

    def render(self) -> str:
        if self.numeric:
            pairs = [("count", self.count), ("mean", self.mean),
                     ("std", self.std), ("min", self.min), ("25%", self.p25),
                     ("50%", self.p50), ("75%", self.p75), ("max", self.max)]
            return "\n".join(f"{k}: {format_number(v)}" for k, v in pairs)
        pairs = [("count", self.count), ("unique", self.unique),
                 ("top", self.top if self.top is not None else "NULL"),
                 ("freq", self.freq)]
        return "\n".join(f"{k}: {v if v is not None else 'NULL'}" for k, v in pairs)

    def to_json(self) -> dict:
        data = {k: cell_to_json(v) for k, v in self.__dict__.items()}
        return data


def _percentile(sorted_vals: list[float], q: float) -> float:
    """Linear interpolation between closest ranks (describe() convention)."""
    n = len(sorted_vals)
    if n == 1:
        return float(sorted_vals[0])
    pos = (n - 1) * q
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return float(sorted_vals[lo])
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def compute_stats_from_values(values: list, numeric: bool) -> ColumnStats:
    non_null = [v for v in values if v is not None]
    count = len(non_null)
    if numeric:
        nums = [float(v) for v in non_null]
        if count == 0:
            return ColumnStats(numeric=True, count=0)
        mean = sum(nums) / count
        if count == 1:
            std = 0.0
        else:
            std = math.sqrt(sum((x - mean) ** 2 for x in nums) / (count - 1))
        s = sorted(nums)
        return ColumnStats(
            numeric=True, count=count, mean=mean, std=std,
            min=s[0], p25=_percentile(s, 0.25), p50=_percentile(s, 0.5),
            p75=_percentile(s, 0.75), max=s[-1])
    if count == 0:
        return ColumnStats(numeric=False, count=0)
    counts: dict = {}
    for v in non_null:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts, key=lambda k: counts[k])
    return ColumnStats(numeric=False, count=count, unique=len(counts),
                       top=top, freq=counts[top])


class Explorer:
    def __init__(self, state: EpisodeState, engine, dialect: DialectProfile,
                 limits: ExecLimits, caps: ObservationCaps,
                 max_steps: int = 30):
        self.state = state
        self.engine = engine
        self.dialect = dialect
        self.limits = limits
        self.caps = caps
        self.max_steps = max_steps

    # -- plumbing ------------------------------------------------------------

    def _select_from(self, ref: TableRef, select_expr: str, suffix: str = "") -> str:
        body = f"SELECT {select_expr} FROM {ref.render(self.dialect)}"
        if suffix:
            body += f" {suffix}"
        if ref.is_cte:
            from .compiler import CompiledStep
            step = CompiledStep("_probe", body, (ref.base,))
            return compose_with_chain(step, self.state)
        return body

    def _resolve(self, table_text: str) -> TableRef:
        return resolve_table_ref(table_text, self.state)

    def _known_columns(self, ref: TableRef) -> Optional[list[str]]:
        if ref.is_cte:
            cte = self.state.find_cte(ref.base)
            if cte and cte.cached_preview is not None:
                return cte.cached_preview.column_names
            return None
        table = self.state.schema.find_table(ref.base)
        return table.column_names() if table else None

    def _resolve_column(self, ref: TableRef, column_text: str) -> str:
        name = column_text.strip()
        if "." in name:
            qualifier, rest = name.split(".", 1)
            qualifier = qualifier.strip().strip('`"')
            if qualifier.lower() in {ref.base.lower(),
                                     (ref.alias or "").lower()}:
                name = rest
        name = name.strip().strip('`"')
        known = self._known_columns(ref)
        if known is not None:
            for k in known:
                if k.lower() == name.lower():
                    return k
            raise UnknownColumnError(
                f"unknown column {name!r} in {ref.base!r}; "
                f"columns: {', '.join(known)}")
        return name

    def _quote_col(self, name: str) -> str:
        return self.dialect.render_table_name(name)

    # -- dispatch ------------------------------------------------------------

    def explore(self, cmd: ActionCommand) -> Observation:
        if cmd.kind != ActionKind.EXPLORATION:
            raise ValueError(f"{cmd.name} is not an exploration action")
        handler = getattr(self, f"_do_{cmd.name}")
        return handler(cmd)

    # -- per-action handlers -------------------------------------------------

    def _do_get_overview(self, cmd) -> Observation:
        remaining = max(0, self.max_steps - self.state.step_count)
        lines = [
            f"Question: {self.state.task.question}",
        ]
        if self.state.task.evidence:
            lines.append(f"Evidence: {self.state.task.evidence}")
        lines.append(f"Tables: {', '.join(self.state.schema.table_names())}")
        if self.state.ctes:
            lines.append(
                f"Materialized CTEs: {', '.join(c.cte_id for c in self.state.ctes)}")
        lines.append(f"Steps remaining: {remaining}")
        lines.append('Use ["get_actions"] to list all available actions.')
        return Observation(ObservationClass.OVERVIEW, "\n".join(lines))

    def _do_get_query(self, cmd) -> Observation:
        return Observation(ObservationClass.EXPLORATION_RESULT,
                           self.state.task.question)

    def _do_get_schema(self, cmd) -> Observation:
        lines = []
        for table in self.state.schema.tables:
            lines.append(f"CREATE TABLE {self._quote_col(table.name)} (")
            col_lines = []
            for col in table.columns:
                decl = f"  {self._quote_col(col.name)} {col.declared_type}".rstrip()
                if not col.nullable:
                    decl += " NOT NULL"
                col_lines.append(decl)
            lines.append(",\n".join(col_lines))
            lines.append(");")
        for fk in self.state.schema.foreign_keys:
            lines.append(
                f"-- FOREIGN KEY {fk.table}.{fk.column} -> "
                f"{fk.ref_table}.{fk.ref_column}")
        return Observation(ObservationClass.EXPLORATION_RESULT, "\n".join(lines))

    def _do_get_tables(self, cmd) -> Observation:
        lines = ["Tables:"]
        lines += [f"  {n}" for n in self.state.schema.table_names()]
        if self.state.ctes:
            lines.append("CTEs:")
            lines += [f"  {c.cte_id}" for c in self.state.ctes]
        return Observation(ObservationClass.EXPLORATION_RESULT, "\n".join(lines))

    def _do_get_columns(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        cols = self._known_columns(ref)
        if cols is None:
            table = self.engine.run_select(
                self._select_from(ref, "*", "LIMIT 0"), self.limits)
            cols = table.column_names
        text = f"Columns of {ref.base}:\n" + "\n".join(f"  {c}" for c in cols)
        return Observation(ObservationClass.EXPLORATION_RESULT, text,
                           structured={"table": ref.base, "columns": cols})

    def _do_get_actions(self, cmd) -> Observation:
        return Observation(ObservationClass.EXPLORATION_RESULT,
                           action_catalog.render_actions_help())

    def _do_get_operations(self, cmd) -> Observation:
        return Observation(
            ObservationClass.EXPLORATION_RESULT,
            action_catalog.render_actions_help(ActionKind.RELATIONAL_ALGEBRA))

    def _do_preview_table(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        table = self.engine.run_select(
            self._select_from(ref, "*", f"LIMIT {self.caps.preview_rows}"),
            self.limits)
        text = (f"First {len(table.rows)} row(s) of {ref.base}:\n"
                + render_grid(table, self.caps.cell_width))
        return Observation(ObservationClass.EXPLORATION_RESULT, text,
                           structured={"table": ref.base,
                                       "preview": table.to_json()})

    def _do_get_column_types(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        if not ref.is_cte:
            table = self.state.schema.find_table(ref.base)
            pairs = [(c.name, c.declared_type or "ANY") for c in table.columns]
        else:
            sample = self.engine.run_select(
                self._select_from(ref, "*", "LIMIT 100"), self.limits)
            pairs = [(n, t.value) for n, t in sample.columns]
        text = (f"Column types of {ref.base}:\n"
                + "\n".join(f"  {n}: {t}" for n, t in pairs))
        return Observation(ObservationClass.EXPLORATION_RESULT, text,
                           structured={"table": ref.base,
                                       "types": dict(pairs)})

    def _column_values(self, ref: TableRef, column: str) -> ResultTable:
        return self.engine.run_select(
            self._select_from(ref, self._quote_col(column)), self.limits)

    def _do_get_column_stats(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        column = self._resolve_column(ref, str(cmd.arg("column_id")))
        stats = self.compute_column_stats(ref, column)
        text = f"Statistics for {ref.base}.{column}:\n{stats.render()}"
        return Observation(ObservationClass.EXPLORATION_RESULT, text,
                           structured={"table": ref.base, "column": column,
                                       "stats": stats.to_json()})

    def compute_column_stats(self, ref: TableRef, column: str) -> ColumnStats:
        table = self._column_values(ref, column)
        values = [row[0] for row in table.rows]
        numeric = table.columns[0][1] in (
            CellType.INTEGER, CellType.REAL, CellType.BOOL)
        return compute_stats_from_values(values, numeric)

    def _do_get_unique_values(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        column = self._resolve_column(ref, str(cmd.arg("column_id")))
        cap = self.caps.unique_cap
        table = self.engine.run_select(
            self._select_from(ref, f"DISTINCT {self._quote_col(column)}",
                              f"LIMIT {cap + 1}"),
            self.limits)
        values = [row[0] for row in table.rows]
        more = 0
        if len(values) > cap:
            values = values[:cap]
            count_table = self.engine.run_select(
                self._select_from(
                    ref, f"COUNT(DISTINCT {self._quote_col(column)})"),
                self.limits)
            more = int(count_table.rows[0][0]) - cap
        lines = [f"Unique values of {ref.base}.{column}:"]
        lines += [f"  {format_cell(v, self.caps.cell_width)}" for v in values]
        if more > 0:
            lines.append(f"  (+{more} more)")
        return Observation(
            ObservationClass.EXPLORATION_RESULT, "\n".join(lines),
            structured={"table": ref.base, "column": column,
                        "values": [cell_to_json(v) for v in values],
                        "more": more})

    def _do_get_sample_values(self, cmd) -> Observation:
        ref = self._resolve(str(cmd.arg("table_id")))
        column = self._resolve_column(ref, str(cmd.arg("column_id")))
        table = self._column_values(ref, column)
        values = [row[0] for row in table.rows]
        k = self.caps.sample_size
        if self.caps.seeded_sampling:
            seen: dict = {}
            keyed = []
            for v in values:
                occurrence = seen.get(v, 0)
                seen[v] = occurrence + 1
                digest = hashlib.sha256(
                    f"{self.state.seed}:{ref.base}:{column}:"
                    f"{occurrence}:{v!r}".encode()).hexdigest()
                keyed.append((digest, v))
            keyed.sort(key=lambda kv: kv[0])
            sample = [v for _, v in keyed[:k]]
        else:
            sample = values[:k]
        lines = [f"Sample values of {ref.base}.{column}:"]
        lines += [f"  {format_cell(v, self.caps.cell_width)}" for v in sample]
        return Observation(
            ObservationClass.EXPLORATION_RESULT, "\n".join(lines),
            structured={"table": ref.base, "column": column,
                        "values": [cell_to_json(v) for v in sample]})
