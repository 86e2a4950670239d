import json
import os
import shutil

import pytest

from querygym.dataset import FieldMap, load_dataset, materialize_target
from querygym.engine import SqliteEngine
from querygym.errors import ManifestError, TaskInvalidError
from querygym.model import Dialect


class TestLoadDataset:
    def test_fixture_counts(self, fixture_root):
        report = load_dataset(fixture_root, "dev")
        assert len(report.tasks) == 14
        assert report.errors == []

    def test_task_ids_are_split_qualified(self, fixture_root):
        report = load_dataset(fixture_root, "dev")
        assert [t.task_id for t in report.tasks] == [
            f"dev:{i}" for i in range(14)]

    def test_remediation_fields(self, tasks):
        assert tasks["dev:12"].is_remediation
        assert tasks["dev:13"].is_remediation
        assert not tasks["dev:0"].is_remediation

    def test_db_refs_exist(self, tasks):
        for task in tasks.values():
            assert os.path.exists(task.db_ref)
            assert task.dialect == Dialect.SQLITE

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError):
            load_dataset(str(tmp_path), "dev")

    def test_invalid_json(self, tmp_path):
        (tmp_path / "dev.json").write_text("{not json")
        with pytest.raises(ManifestError):
            load_dataset(str(tmp_path), "dev")

    def test_non_array_manifest(self, tmp_path):
        (tmp_path / "dev.json").write_text('{"a": 1}')
        with pytest.raises(ManifestError):
            load_dataset(str(tmp_path), "dev")

    def test_bad_records_reported_not_fatal(self, fixture_root, tmp_path):
        root = tmp_path / "mixed"
        shutil.copytree(fixture_root, root)
        with open(root / "dev.json") as fh:
            records = json.load(fh)
        records.insert(0, {"question": "no sql or db"})
        records.insert(1, "not an object")
        records.insert(2, {"question": "q", "SQL": "SELECT 1",
                           "db_id": "missing_db"})
        (root / "dev.json").write_text(json.dumps(records))
        report = load_dataset(str(root), "dev")
        assert len(report.tasks) == 14
        assert len(report.errors) == 3
        assert any("no gold SQL" in e for e in report.errors)
        assert any("not an object" in e for e in report.errors)
        assert any("database not found" in e for e in report.errors)

    def test_pg_url_map_switches_dialect(self, fixture_root):
        report = load_dataset(fixture_root, "dev",
                              pg_url_map={"moviedb": "postgresql://x/y"})
        by_id = {t.task_id: t for t in report.tasks}
        assert by_id["dev:0"].dialect == Dialect.POSTGRESQL
        assert by_id["dev:0"].db_ref == "postgresql://x/y"
        assert by_id["dev:7"].dialect == Dialect.SQLITE


class TestFieldMap:
    def test_defaults(self, tmp_path):
        fmap = FieldMap.load(str(tmp_path))
        assert fmap.question_field == "question"
        assert fmap.sql_field is None

    def test_override_file(self, tmp_path, fixture_root):
        root = tmp_path / "renamed"
        shutil.copytree(fixture_root, root)
        with open(root / "dev.json") as fh:
            records = json.load(fh)
        for r in records:
            r["nl_question"] = r.pop("question")
            r["gold"] = r.pop("SQL")
        (root / "dev.json").write_text(json.dumps(records))
        (root / "dataset_map.json").write_text(json.dumps(
            {"question_field": "nl_question", "sql_field": "gold",
             "ignored_key": "x"}))
        report = load_dataset(str(root), "dev")
        assert len(report.tasks) == 14
        assert report.errors == []

    def test_initial_sql_candidates(self, tmp_path, fixture_root):
        # BIRD-Critic style issue_sql is picked up without a map file
        root = tmp_path / "critic"
        shutil.copytree(fixture_root, root)
        records = [{"question": "q", "SQL": "SELECT 1", "db_id": "moviedb",
                    "issue_sql": "SELECT broken"}]
        (root / "dev.json").write_text(json.dumps(records))
        report = load_dataset(str(root), "dev")
        assert report.tasks[0].initial_sql == "SELECT broken"


class TestMaterializeTarget:
    def test_matches_direct_execution(self, tasks):
        task = tasks["dev:0"]
        engine = SqliteEngine(task.db_ref)
        target = materialize_target(task, engine)
        direct = engine.run_select(task.gold_sql)
        assert target.rows == direct.rows
        engine.close()

    def test_cached_by_checksum(self, tasks):
        task = tasks["dev:0"]
        engine = SqliteEngine(task.db_ref)
        first = materialize_target(task, engine)
        second = materialize_target(task, engine)
        assert first is second
        engine.close()

    def test_trailing_semicolon_stripped(self, tasks, tmp_path):
        task = tasks["dev:0"]
        patched = type(task)(
            task_id="dev:semi", db_ref=task.db_ref, dialect=task.dialect,
            question=task.question, gold_sql=task.gold_sql + " ;")
        engine = SqliteEngine(task.db_ref)
        target = materialize_target(patched, engine)
        assert len(target.rows) == 12
        engine.close()

    def test_broken_gold_query(self, tasks):
        task = tasks["dev:0"]
        broken = type(task)(
            task_id="dev:broken", db_ref=task.db_ref, dialect=task.dialect,
            question=task.question, gold_sql="SELECT nope FROM movies")
        engine = SqliteEngine(task.db_ref)
        with pytest.raises(TaskInvalidError) as exc:
            materialize_target(broken, engine)
        assert "no such column" in str(exc.value)
        engine.close()
