"""Read-only execution layer over SQLite files and PostgreSQL servers.

Every statement that reaches an engine must be a SELECT (optionally wrapped in
a WITH chain); the connection itself is additionally opened read-only so even
a guard bypass cannot mutate data. Engine failures are classified into a small
code enum, but the verbatim engine message is always preserved because the
agent consumes the raw trace.
"""
from __future__ import annotations

import os
import re
import sqlite3
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import (
    ColumnInfo,
    Dialect,
    ForeignKey,
    ResultTable,
    SchemaInfo,
    TableInfo,
)


class EngineErrorCode(str, Enum):
    UNKNOWN_COLUMN = "UnknownColumn"
    UNKNOWN_TABLE = "UnknownTable"
    SYNTAX = "Syntax"
    TYPE_MISMATCH = "TypeMismatch"
    TIMEOUT = "Timeout"
    ROW_CAP = "RowCap"
    CONNECTION = "Connection"
    OTHER = "Other"


class EngineError(Exception):
    def __init__(self, code: EngineErrorCode, engine_message: str, sql: str = ""):
        super().__init__(engine_message)
        self.code = code
        self.engine_message = engine_message or "unknown engine failure"
        self.sql_excerpt = sql[:200]


@dataclass(frozen=True)
class ExecLimits:
    max_rows: int = 10_000
    timeout_ms: int = 10_000

    def __post_init__(self) -> None:
        if self.max_rows <= 0 or self.timeout_ms <= 0:
            raise ValueError("limits must be positive")


_READONLY_RE = re.compile(r"^\s*(--[^\n]*\n\s*)*(SELECT|WITH)\b", re.IGNORECASE)


def check_read_only(sql: str) -> None:
    if not _READONLY_RE.match(sql):
        raise EngineError(EngineErrorCode.OTHER,
                          "only SELECT statements are allowed", sql)


_SQLITE_PATTERNS = [
    ("no such table", EngineErrorCode.UNKNOWN_TABLE),
    ("no such column", EngineErrorCode.UNKNOWN_COLUMN),
    ("syntax error", EngineErrorCode.SYNTAX),
    ("unrecognized token", EngineErrorCode.SYNTAX),
    ("ambiguous column name", EngineErrorCode.UNKNOWN_COLUMN),
    ("datatype mismatch", EngineErrorCode.TYPE_MISMATCH),
    ("interrupted", EngineErrorCode.TIMEOUT),
]


def classify_sqlite_error(message: str) -> EngineErrorCode:
    lowered = message.lower()
    for needle, code in _SQLITE_PATTERNS:
        if needle in lowered:
            return code
    return EngineErrorCode.OTHER


class SqliteEngine:
    dialect = Dialect.SQLITE

    def __init__(self, path: str):
        if not os.path.exists(path):
            raise EngineError(EngineErrorCode.CONNECTION,
                              f"database file not found: {path}")
        try:
            self._conn = sqlite3.connect(
                f"file:{path}?mode=ro", uri=True, check_same_thread=False)
        except sqlite3.Error as exc:
            raise EngineError(EngineErrorCode.CONNECTION, str(exc))
        self._path = path

    def close(self) -> None:
        self._conn.close()

    def run_select(self, sql: str, limits: ExecLimits = ExecLimits()) -> ResultTable:
        check_read_only(sql)
        deadline = time.monotonic() + limits.timeout_ms / 1000.0

        def deadline_guard():
            return 1 if time.monotonic() > deadline else 0

        self._conn.set_progress_handler(deadline_guard, 10_000)
        try:
            cursor = self._conn.execute(sql)
            rows = cursor.fetchmany(limits.max_rows + 1)
            names = [d[0] for d in cursor.description] if cursor.description else []
        except sqlite3.OperationalError as exc:
            message = str(exc)
            if "interrupted" in message.lower():
                raise EngineError(EngineErrorCode.TIMEOUT, message, sql)
            raise EngineError(classify_sqlite_error(message), message, sql)
        except sqlite3.Error as exc:
            raise EngineError(classify_sqlite_error(str(exc)), str(exc), sql)
        finally:
            self._conn.set_progress_handler(None, 0)

        truncated = len(rows) > limits.max_rows
        if truncated:
            rows = rows[:limits.max_rows]
        return ResultTable.from_rows(names, [tuple(r) for r in rows],
                                     truncated=truncated)

    def fetch_schema(self) -> SchemaInfo:
        try:
            cursor = self._conn.execute(
                "SELECT name FROM sqlite_master WHERE type='table' "
                "AND name NOT LIKE 'sqlite_%' ORDER BY rowid")
            names = [r[0] for r in cursor.fetchall()]
            tables = []
            fks = []
            for name in names:
                cols = []
                for row in self._conn.execute(f'PRAGMA table_info("{name}")'):
                    # cid, name, type, notnull, dflt_value, pk
                    cols.append(ColumnInfo(
                        name=row[1],
                        declared_type=row[2] or "",
                        nullable=not row[3],
                    ))
                tables.append(TableInfo(name=name, columns=tuple(cols)))
                for row in self._conn.execute(f'PRAGMA foreign_key_list("{name}")'):
                    # id, seq, ref_table, from, to, ...
                    fks.append(ForeignKey(
                        table=name, column=row[3],
                        ref_table=row[2], ref_column=row[4] or ""))
            return SchemaInfo(tables=tuple(tables), foreign_keys=tuple(fks))
        except sqlite3.Error as exc:
            raise EngineError(EngineErrorCode.OTHER, str(exc))


_PG_SQLSTATE_MAP = {
    "42P01": EngineErrorCode.UNKNOWN_TABLE,
    "42703": EngineErrorCode.UNKNOWN_COLUMN,
    "42601": EngineErrorCode.SYNTAX,
    "42804": EngineErrorCode.TYPE_MISMATCH,
    "57014": EngineErrorCode.TIMEOUT,
}


def classify_pg_error(sqlstate: Optional[str]) -> EngineErrorCode:
    if not sqlstate:
        return EngineErrorCode.OTHER
    if sqlstate in _PG_SQLSTATE_MAP:
        return _PG_SQLSTATE_MAP[sqlstate]
    if sqlstate.startswith("22"):
        return EngineErrorCode.TYPE_MISMATCH
    if sqlstate.startswith("42"):
        return EngineErrorCode.SYNTAX
    if sqlstate.startswith("08"):
        return EngineErrorCode.CONNECTION
    return EngineErrorCode.OTHER


class PostgresEngine:
    dialect = Dialect.POSTGRESQL

    def __init__(self, url: str, timeout_ms: int = 10_000):
        try:
            import psycopg
        except ImportError as exc:
            raise EngineError(
                EngineErrorCode.CONNECTION,
                f"psycopg is not installed; install querygym[postgres] ({exc})")
        try:
            self._conn = psycopg.connect(url, autocommit=True)
            with self._conn.cursor() as cur:
                cur.execute("SET default_transaction_read_only = on")
                cur.execute(f"SET statement_timeout = {int(timeout_ms)}")
        except Exception as exc:  # psycopg.Error
            raise EngineError(EngineErrorCode.CONNECTION, str(exc))

    def close(self) -> None:
        self._conn.close()

    def run_select(self, sql: str, limits: ExecLimits = ExecLimits()) -> ResultTable:
        check_read_only(sql)
        try:
            with self._conn.cursor() as cur:
                cur.execute(sql)
                rows = cur.fetchmany(limits.max_rows + 1)
                names = [d.name for d in cur.description] if cur.description else []
        except Exception as exc:
            sqlstate = getattr(exc, "sqlstate", None)
            raise EngineError(classify_pg_error(sqlstate), str(exc), sql)
        truncated = len(rows) > limits.max_rows
        if truncated:
            rows = rows[:limits.max_rows]
        return ResultTable.from_rows(names, [tuple(r) for r in rows],
                                     truncated=truncated)

    def fetch_schema(self) -> SchemaInfo:
        tables_sql = """
            SELECT table_name FROM information_schema.tables
            WHERE table_schema = 'public' AND table_type = 'BASE TABLE'
            ORDER BY table_name
        """
        cols_sql = """
            SELECT column_name, data_type, is_nullable
            FROM information_schema.columns
            WHERE table_schema = 'public' AND table_name = %s
            ORDER BY ordinal_position
        """
        fks_sql = """
            SELECT tc.table_name, kcu.column_name,
                   ccu.table_name, ccu.column_name
            FROM information_schema.table_constraints tc
            JOIN information_schema.key_column_usage kcu
              ON tc.constraint_name = kcu.constraint_name
             AND tc.table_schema = kcu.table_schema
            JOIN information_schema.constraint_column_usage ccu
              ON tc.constraint_name = ccu.constraint_name
             AND tc.table_schema = ccu.table_schema
            WHERE tc.constraint_type = 'FOREIGN KEY'
              AND tc.table_schema = 'public'
        """
        try:
            with self._conn.cursor() as cur:
                cur.execute(tables_sql)
                names = [r[0] for r in cur.fetchall()]
                tables = []
                for name in names:
                    cur.execute(cols_sql, (name,))
                    cols = tuple(
                        ColumnInfo(name=r[0], declared_type=r[1],
                                   nullable=r[2] == "YES")
                        for r in cur.fetchall())
                    tables.append(TableInfo(name=name, columns=cols))
                cur.execute(fks_sql)
                fks = tuple(ForeignKey(*r) for r in cur.fetchall())
            return SchemaInfo(tables=tuple(tables), foreign_keys=fks)
        except EngineError:
            raise
        except Exception as exc:
            raise EngineError(EngineErrorCode.OTHER, str(exc))


def open_engine(db_ref: str, dialect: Dialect,
                timeout_ms: int = 10_000):
    if dialect == Dialect.SQLITE:
        return SqliteEngine(db_ref)
    return PostgresEngine(db_ref, timeout_ms=timeout_ms)
