"""Load BIRD-format datasets into tasks and materialize target tables.

Expected layout:

    <root>/<split>.json                         JSON array of records
    <root>/<split>_databases/<db_id>/<db_id>.sqlite

Field names follow the BIRD dev-set convention; `<root>/dataset_map.json` can
override them ({"question_field", "sql_field", "db_id_field",
"initial_sql_field", "evidence_field"}). Records with PostgreSQL-hosted
databases are supported through a db_id -> connection URL map.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .engine import EngineError, ExecLimits
from .errors import ManifestError, TaskInvalidError
from .model import Dialect, ResultTable, Task

_SQL_FIELD_CANDIDATES = ("SQL", "query", "sql", "gold_sql")
_INITIAL_SQL_CANDIDATES = ("issue_sql", "buggy_sql", "initial_sql", "error_sql")


@dataclass(frozen=True)
class FieldMap:
    question_field: str = "question"
    sql_field: Optional[str] = None  # None: try the usual candidates
    db_id_field: str = "db_id"
    initial_sql_field: Optional[str] = None
    evidence_field: str = "evidence"

    @classmethod
    def load(cls, root: str) -> "FieldMap":
        path = os.path.join(root, "dataset_map.json")
        if not os.path.exists(path):
            return cls()
        with open(path) as fh:
            data = json.load(fh)
        return cls(**{k: v for k, v in data.items()
                      if k in cls.__dataclass_fields__})


@dataclass
class LoadReport:
    tasks: list[Task] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)  # "split:idx: reason"


def _pick(record: dict, explicit: Optional[str], candidates: tuple[str, ...]):
    if explicit is not None:
        return record.get(explicit)
    for name in candidates:
        if name in record:
            return record[name]
    return None


def load_dataset(root: str, split: str,
                 pg_url_map: Optional[dict[str, str]] = None) -> LoadReport:
    manifest_path = os.path.join(root, f"{split}.json")
    if not os.path.exists(manifest_path):
        raise ManifestError(f"manifest not found: {manifest_path}")
    try:
        with open(manifest_path) as fh:
            records = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}")
    if not isinstance(records, list):
        raise ManifestError("manifest must be a JSON array of records")

    fmap = FieldMap.load(root)
    pg_url_map = pg_url_map or {}
    report = LoadReport()
    for idx, record in enumerate(records):
        task_id = f"{split}:{idx}"
        if not isinstance(record, dict):
            report.errors.append(f"{task_id}: record is not an object")
            continue
        question = record.get(fmap.question_field)
        if not question:
            report.errors.append(
                f"{task_id}: missing field {fmap.question_field!r}")
            continue
        gold_sql = _pick(record, fmap.sql_field, _SQL_FIELD_CANDIDATES)
        if not gold_sql:
            report.errors.append(f"{task_id}: no gold SQL field found")
            continue
        db_id = record.get(fmap.db_id_field)
        if not db_id:
            report.errors.append(
                f"{task_id}: missing field {fmap.db_id_field!r}")
            continue

        if db_id in pg_url_map:
            db_ref = pg_url_map[db_id]
            dialect = Dialect.POSTGRESQL
        else:
            db_ref = os.path.join(
                root, f"{split}_databases", db_id, f"{db_id}.sqlite")
            dialect = Dialect.SQLITE
            if not os.path.exists(db_ref):
                report.errors.append(
                    f"{task_id}: database not found for db_id {db_id!r} "
                    f"({db_ref})")
                continue

        initial_sql = _pick(record, fmap.initial_sql_field,
                            _INITIAL_SQL_CANDIDATES)
        report.tasks.append(Task(
            task_id=task_id,
            db_ref=db_ref,
            dialect=dialect,
            question=str(question),
            gold_sql=str(gold_sql),
            initial_sql=str(initial_sql) if initial_sql else None,
            evidence=record.get(fmap.evidence_field) or None,
        ))
    return report


_target_cache: dict[tuple, ResultTable] = {}


def _db_checksum(db_ref: str, dialect: Dialect) -> str:
    if dialect == Dialect.SQLITE and os.path.exists(db_ref):
        digest = hashlib.md5()
        with open(db_ref, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        return digest.hexdigest()
    return db_ref


def materialize_target(task: Task, engine,
                       limits: ExecLimits = ExecLimits()) -> ResultTable:
    key = (task.task_id, _db_checksum(task.db_ref, task.dialect),
           task.gold_sql)
    cached = _target_cache.get(key)
    if cached is not None:
        return cached
    sql = task.gold_sql.strip().rstrip(";").strip()
    try:
        result = engine.run_select(sql, limits)
    except EngineError as exc:
        raise TaskInvalidError(
            f"gold query of task {task.task_id} failed: "
            f"{exc.code.value}: {exc.engine_message}")
    _target_cache[key] = result
    return result
