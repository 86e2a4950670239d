"""Compile relational algebra commands into dialect SELECT statements.

Compilation is pure: it reads the episode state (schema + CTE registry) but
never executes anything. Free-form fragments (conditions, projections, order
keys) pass through with backtick re-quoting and a semicolon guard only; the
engine is the semantic validator, and its errors surface as feedback.
"""
from __future__ import annotations

import difflib
import re
from dataclasses import dataclass
from typing import Optional

from .actions import ActionCommand
from .dialect import DialectProfile
from .errors import (
    BadJoinTypeError,
    BadLimitError,
    BadUnionModeError,
    FragmentSemicolonError,
    UnionWidthError,
    UnknownTableError,
)
from .model import EpisodeState, next_cte_id


@dataclass(frozen=True)
class TableRef:
    base: str  # canonical base table name or CTE id
    alias: Optional[str] = None
    is_cte: bool = False

    def render(self, dialect: DialectProfile) -> str:
        base = self.base if self.is_cte else dialect.render_table_name(self.base)
        if self.alias:
            return f"{base} AS {dialect.render_table_name(self.alias)}"
        return base

    @property
    def exposed_name(self) -> str:
        return self.alias or self.base


@dataclass(frozen=True)
class CompiledStep:
    new_cte_id: str
    select_sql: str
    referenced: tuple[str, ...]


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in ('`', '"'):
        inner = token[1:-1]
        return inner.replace(token[0] * 2, token[0])
    return token


_AS_SPLIT = re.compile(r"\s+as\s+", re.IGNORECASE)


def _split_alias(text: str) -> tuple[str, Optional[str]]:
    """Split `base as alias` on the last top-level AS outside quotes."""
    depth_quote = None
    positions = []
    i = 0
    lowered = text.lower()
    while i < len(text):
        ch = text[i]
        if depth_quote:
            if ch == depth_quote:
                depth_quote = None
            i += 1
            continue
        if ch in ('`', '"', "'"):
            depth_quote = ch
            i += 1
            continue
        if lowered.startswith(" as ", i):
            positions.append(i)
            i += 4
            continue
        i += 1
    if not positions:
        return text.strip(), None
    cut = positions[-1]
    return text[:cut].strip(), text[cut + 4:].strip()


def resolve_table_ref(text: str, state: EpisodeState) -> TableRef:
    base_raw, alias_raw = _split_alias(text)
    base = _unquote(base_raw)
    alias = _unquote(alias_raw) if alias_raw else None

    cte = state.find_cte(base)
    if cte is not None:
        return TableRef(base=cte.cte_id, alias=alias, is_cte=True)
    table = state.schema.find_table(base)
    if table is not None:
        return TableRef(base=table.name, alias=alias, is_cte=False)

    known = state.schema.table_names() + [c.cte_id for c in state.ctes]
    near = difflib.get_close_matches(base, known, n=3)
    hint = f"; did you mean: {', '.join(near)}?" if near else ""
    raise UnknownTableError(f"unknown table {base!r}{hint}")


def normalize_fragment(text: str, dialect: DialectProfile) -> str:
    """Rewrite backtick-quoted identifiers to the dialect's quoting.

    Single-quoted string literals pass through untouched. Semicolons are
    rejected outright as an injection guard.
    """
    if ";" in text:
        raise FragmentSemicolonError("semicolons are not allowed in fragments")
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "'":
            j = i + 1
            while j < len(text):
                if text[j] == "'":
                    if j + 1 < len(text) and text[j + 1] == "'":
                        j += 2
                        continue
                    break
                j += 1
            out.append(text[i:j + 1])
            i = j + 1
            continue
        if ch == "`":
            j = text.find("`", i + 1)
            if j < 0:
                out.append(ch)
                i += 1
                continue
            ident = text[i + 1:j]
            out.append(dialect.quote_identifier(ident))
            i = j + 1
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _proj(cmd: ActionCommand, dialect: DialectProfile, param: str = "projected_columns") -> str:
    raw = cmd.arg(param)
    if raw is None:
        return "*"
    return normalize_fragment(str(raw), dialect)


def compile_projection(cmd: ActionCommand, state: EpisodeState,
                       dialect: DialectProfile) -> CompiledStep:
    ref = resolve_table_ref(str(cmd.arg("table_id")), state)
    cols = normalize_fragment(str(cmd.arg("columns")), dialect)
    sql = f"SELECT {cols} FROM {ref.render(dialect)}"
    return CompiledStep(next_cte_id(state), sql, (ref.base,))


def compile_filter(cmd: ActionCommand, state: EpisodeState,
                   dialect: DialectProfile) -> CompiledStep:
    ref = resolve_table_ref(str(cmd.arg("table_id")), state)
    cond = normalize_fragment(str(cmd.arg("conditions")), dialect)
    proj = _proj(cmd, dialect)
    sql = f"SELECT {proj} FROM {ref.render(dialect)} WHERE {cond}"
    return CompiledStep(next_cte_id(state), sql, (ref.base,))


_JOIN_TYPES = {
    "JOIN": "INNER JOIN",
    "INNER JOIN": "INNER JOIN",
    "LEFT JOIN": "LEFT JOIN",
    "LEFT OUTER JOIN": "LEFT JOIN",
    "RIGHT JOIN": "RIGHT JOIN",
    "RIGHT OUTER JOIN": "RIGHT JOIN",
    "FULL JOIN": "FULL OUTER JOIN",
    "FULL OUTER JOIN": "FULL OUTER JOIN",
    "CROSS JOIN": "CROSS JOIN",
}


def _normalize_join_type(raw: str) -> str:
    key = " ".join(raw.upper().split())
    if key not in _JOIN_TYPES:
        raise BadJoinTypeError(
            f"unsupported join type {raw!r}; expected one of INNER JOIN, "
            f"LEFT JOIN, RIGHT JOIN, FULL OUTER JOIN, CROSS JOIN")
    return _JOIN_TYPES[key]


def _columns_of(ref: TableRef, state: EpisodeState) -> Optional[list[str]]:
    if ref.is_cte:
        cte = state.find_cte(ref.base)
        if cte and cte.cached_preview is not None:
            return cte.cached_preview.column_names
        return None
    table = state.schema.find_table(ref.base)
    return table.column_names() if table else None


def compile_join(cmd: ActionCommand, state: EpisodeState,
                 dialect: DialectProfile) -> CompiledStep:
    refs = [resolve_table_ref(t, state) for t in cmd.arg("tables")]
    conds = [normalize_fragment(c, dialect) for c in cmd.arg("conditions")]
    jtypes = [_normalize_join_type(t) for t in cmd.arg("join_types")]
    proj = _proj(cmd, dialect)
    referenced = tuple(r.base for r in refs)
    new_id = next_cte_id(state)

    needs_rewrite = not dialect.supports_right_full_join and any(
        t in ("RIGHT JOIN", "FULL OUTER JOIN") for t in jtypes)

    if not needs_rewrite:
        from_sql = refs[0].render(dialect)
        for ref, cond, jtype in zip(refs[1:], conds, jtypes):
            if jtype == "CROSS JOIN" and not cond.strip():
                from_sql += f" CROSS JOIN {ref.render(dialect)}"
            else:
                jt = "INNER JOIN" if jtype == "CROSS JOIN" else jtype
                from_sql += f" {jt} {ref.render(dialect)} ON {cond}"
        sql = f"SELECT {proj} FROM {from_sql}"
        return CompiledStep(new_id, sql, referenced)

    if any(t == "FULL OUTER JOIN" for t in jtypes):
        if len(refs) != 2:
            raise BadJoinTypeError(
                "FULL OUTER JOIN emulation supports exactly two tables on "
                "this SQLite version")
        left, right = refs
        cond = conds[0]
        if proj == "*":
            lcols = _columns_of(left, state)
            rcols = _columns_of(right, state)
            if lcols is None or rcols is None:
                raise BadJoinTypeError(
                    "FULL OUTER JOIN emulation needs an explicit projection "
                    "for this table")
            proj = ", ".join(
                [f"{dialect.render_table_name(left.exposed_name)}.{dialect.render_table_name(c)}" for c in lcols]
                + [f"{dialect.render_table_name(right.exposed_name)}.{dialect.render_table_name(c)}" for c in rcols]
            )
        # UNION of the two one-sided joins; deduplicates genuine duplicate
        # rows, which matches the set semantics used by the reward check.
        sql = (
            f"SELECT {proj} FROM {left.render(dialect)} LEFT JOIN "
            f"{right.render(dialect)} ON {cond} "
            f"UNION "
            f"SELECT {proj} FROM {right.render(dialect)} LEFT JOIN "
            f"{left.render(dialect)} ON {cond}"
        )
        return CompiledStep(new_id, sql, referenced)

    # RIGHT JOIN on old SQLite: fold left, swapping sides into a LEFT JOIN.
    expr = refs[0].render(dialect)
    for ref, cond, jtype in zip(refs[1:], conds, jtypes):
        if jtype == "RIGHT JOIN":
            # parenthesizing a bare table ref would hide its alias on
            # older SQLite, so only wrap compound join expressions
            inner = f"({expr})" if " JOIN " in expr.upper() else expr
            expr = f"{ref.render(dialect)} LEFT JOIN {inner} ON {cond}"
        elif jtype == "CROSS JOIN" and not cond.strip():
            expr = f"{expr} CROSS JOIN {ref.render(dialect)}"
        else:
            jt = "INNER JOIN" if jtype == "CROSS JOIN" else jtype
            expr = f"{expr} {jt} {ref.render(dialect)} ON {cond}"
    sql = f"SELECT {proj} FROM {expr}"
    return CompiledStep(new_id, sql, referenced)


_NULLS_SUFFIX = re.compile(r"(?i)\s+NULLS\s+(FIRST|LAST)\s*$")


def _split_top_level_commas(text: str) -> list[str]:
    parts, depth, quote, cur = [], 0, None, []
    for ch in text:
        if quote:
            cur.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in ('"', "'", '`'):
            quote = ch
            cur.append(ch)
            continue
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
        elif ch == ',' and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        cur.append(ch)
    parts.append("".join(cur))
    return parts


def _rewrite_nulls_ordering(order_by: str) -> str:
    """Turn `expr [ASC|DESC] NULLS LAST/FIRST` into a leading IS NULL key."""
    terms = []
    for term in _split_top_level_commas(order_by):
        m = _NULLS_SUFFIX.search(term)
        if not m:
            terms.append(term.strip())
            continue
        placement = m.group(1).upper()
        rest = term[:m.start()].strip()
        expr = re.sub(r"(?i)\s+(ASC|DESC)\s*$", "", rest).strip()
        null_dir = "ASC" if placement == "LAST" else "DESC"
        terms.append(f"({expr} IS NULL) {null_dir}, {rest}")
    return ", ".join(terms)


def compile_order_by(cmd: ActionCommand, state: EpisodeState,
                     dialect: DialectProfile) -> CompiledStep:
    ref = resolve_table_ref(str(cmd.arg("table_id")), state)
    order = normalize_fragment(str(cmd.arg("order_condition")), dialect)
    if not dialect.supports_nulls_ordering and _NULLS_SUFFIX.search(order):
        order = _rewrite_nulls_ordering(order)
    proj = _proj(cmd, dialect)
    sql = f"SELECT {proj} FROM {ref.render(dialect)} ORDER BY {order}"
    return CompiledStep(next_cte_id(state), sql, (ref.base,))


def compile_limit(cmd: ActionCommand, state: EpisodeState,
                  dialect: DialectProfile) -> CompiledStep:
    ref = resolve_table_ref(str(cmd.arg("table_id")), state)
    raw_n = str(cmd.arg("limit")).strip()
    try:
        n = int(raw_n)
    except ValueError:
        raise BadLimitError(f"limit must be an integer, got {raw_n!r}")
    if n < 0:
        raise BadLimitError(f"limit must be non-negative, got {n}")
    proj = _proj(cmd, dialect)
    limit_clause = dialect.limit_template.format(n=n)
    sql = f"SELECT {proj} FROM {ref.render(dialect)} {limit_clause}"
    return CompiledStep(next_cte_id(state), sql, (ref.base,))


def compile_aggregate(cmd: ActionCommand, state: EpisodeState,
                      dialect: DialectProfile) -> CompiledStep:
    ref = resolve_table_ref(str(cmd.arg("table_id")), state)
    groups = normalize_fragment(str(cmd.arg("group_columns")), dialect)
    proj = normalize_fragment(str(cmd.arg("projected_columns")), dialect)
    having = cmd.arg("having_condition")
    sql = f"SELECT {proj} FROM {ref.render(dialect)} GROUP BY {groups}"
    if having is not None:
        sql += f" HAVING {normalize_fragment(str(having), dialect)}"
    return CompiledStep(next_cte_id(state), sql, (ref.base,))


def _check_union_widths(cols1: Optional[str], cols2: Optional[str]) -> None:
    if cols1 is None or cols2 is None:
        return
    w1 = len(_split_top_level_commas(cols1))
    w2 = len(_split_top_level_commas(cols2))
    if w1 != w2:
        raise UnionWidthError(
            f"column lists have different widths ({w1} vs {w2})")


def _compile_set_op(cmd: ActionCommand, state: EpisodeState,
                    dialect: DialectProfile, op: str) -> CompiledStep:
    ref1 = resolve_table_ref(str(cmd.arg("table_1")), state)
    ref2 = resolve_table_ref(str(cmd.arg("table_2")), state)
    cols1 = cmd.arg("table_1_columns")
    cols2 = cmd.arg("table_2_columns")
    _check_union_widths(cols1, cols2)
    sel1 = normalize_fragment(str(cols1), dialect) if cols1 is not None else "*"
    sel2 = normalize_fragment(str(cols2), dialect) if cols2 is not None else "*"
    sql = (f"SELECT {sel1} FROM {ref1.render(dialect)} {op} "
           f"SELECT {sel2} FROM {ref2.render(dialect)}")
    return CompiledStep(next_cte_id(state), sql, (ref1.base, ref2.base))


def compile_union(cmd: ActionCommand, state: EpisodeState,
                  dialect: DialectProfile) -> CompiledStep:
    mode = str(cmd.arg("mode")).strip().upper()
    if mode not in ("ALL", "DISTINCT"):
        raise BadUnionModeError(
            f"union mode must be ALL or DISTINCT, got {cmd.arg('mode')!r}")
    op = "UNION ALL" if mode == "ALL" else "UNION"
    return _compile_set_op(cmd, state, dialect, op)


def compile_intersect(cmd: ActionCommand, state: EpisodeState,
                      dialect: DialectProfile) -> CompiledStep:
    return _compile_set_op(cmd, state, dialect, "INTERSECT")


_COMPILERS = {
    "perform_projection": compile_projection,
    "perform_filter": compile_filter,
    "perform_join": compile_join,
    "perform_order_by": compile_order_by,
    "perform_limit": compile_limit,
    "perform_aggregate": compile_aggregate,
    "perform_union": compile_union,
    "perform_intersect": compile_intersect,
}


def compile_command(cmd: ActionCommand, state: EpisodeState,
                    dialect: DialectProfile) -> CompiledStep:
    try:
        fn = _COMPILERS[cmd.name]
    except KeyError:
        raise ValueError(f"{cmd.name} is not a relational algebra action")
    return fn(cmd, state, dialect)


def compose_with_chain(target, state: EpisodeState) -> str:
    """Full executable SQL for a CompiledStep or an existing CTE id.

    Includes exactly the transitive closure of referenced CTEs, in creation
    order; base tables are referenced directly.
    """
    if isinstance(target, CompiledStep):
        roots = list(target.referenced)
        final_select = target.select_sql
    else:
        cte = state.find_cte(str(target))
        if cte is None:
            raise UnknownTableError(f"unknown CTE id {target!r}")
        roots = [cte.cte_id]
        final_select = f"SELECT * FROM {cte.cte_id}"

    by_id = {c.cte_id: c for c in state.ctes}
    needed: set[str] = set()
    stack = [r for r in roots if r in by_id]
    while stack:
        cid = stack.pop()
        if cid in needed:
            continue
        needed.add(cid)
        for parent in by_id[cid].parent_ids:
            if parent in by_id:
                if parent not in needed:
                    stack.append(parent)
            elif state.schema.find_table(parent) is None:
                raise UnknownTableError(
                    f"CTE {cid} references unknown parent {parent!r}")
    if not needed:
        return final_select
    ordered = [c for c in state.ctes if c.cte_id in needed]
    defs = ", ".join(f"{c.cte_id} AS ({c.sql_text})" for c in ordered)
    return f"WITH {defs} {final_select}"
