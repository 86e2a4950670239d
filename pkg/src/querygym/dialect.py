"""Per-engine SQL emission rules for SQLite and PostgreSQL.

Both dialects quote identifiers with double quotes and concatenate strings
with `||`; the differences that matter here are feature support (RIGHT/FULL
joins, NULLS ordering on old SQLite) and how the engine is driven.
"""
from __future__ import annotations

import re
import sqlite3
from dataclasses import dataclass

from .model import Dialect

_PLAIN_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class DialectProfile:
    name: Dialect
    quote_char: str = '"'
    concat_operator: str = "||"
    limit_template: str = "LIMIT {n}"
    true_literal: str = "TRUE"
    false_literal: str = "FALSE"
    supports_right_full_join: bool = True
    supports_nulls_ordering: bool = True

    def quote_identifier(self, name: str) -> str:
        q = self.quote_char
        return q + name.replace(q, q + q) + q

    def render_table_name(self, name: str) -> str:
        # Plain identifiers stay bare so they compose with unquoted
        # references inside free-form fragments (PostgreSQL case folding).
        if _PLAIN_IDENT.match(name):
            return name
        return self.quote_identifier(name)


def sqlite_profile(version: tuple[int, ...] | None = None) -> DialectProfile:
    v = version if version is not None else sqlite3.sqlite_version_info
    return DialectProfile(
        name=Dialect.SQLITE,
        supports_right_full_join=v >= (3, 39, 0),
        supports_nulls_ordering=v >= (3, 30, 0),
    )


def postgres_profile() -> DialectProfile:
    return DialectProfile(name=Dialect.POSTGRESQL)


def profile_for(dialect: Dialect) -> DialectProfile:
    if dialect == Dialect.SQLITE:
        return sqlite_profile()
    return postgres_profile()
