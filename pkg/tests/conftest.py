import hashlib
import json
import os

import pytest

from querygym.dataset import load_dataset
from querygym.env import EnvConfig, Environment
from querygym.fixtures import build_fixture_dataset


@pytest.fixture(scope="session")
def fixture_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    build_fixture_dataset(str(root))
    return str(root)


@pytest.fixture(scope="session")
def tasks(fixture_root):
    report = load_dataset(fixture_root, "dev")
    assert not report.errors
    return {t.task_id: t for t in report.tasks}


@pytest.fixture(scope="session")
def plans(fixture_root):
    with open(os.path.join(fixture_root, "plans.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def subset_plans(fixture_root):
    with open(os.path.join(fixture_root, "subset_plans.json")) as fh:
        return json.load(fh)


@pytest.fixture
def make_env(tasks):
    envs = []

    def factory(task_id, **config_kwargs) -> Environment:
        env = Environment(tasks[task_id], EnvConfig(**config_kwargs))
        envs.append(env)
        return env

    yield factory
    for env in envs:
        env.close()


def db_checksums(fixture_root):
    sums = {}
    db_root = os.path.join(fixture_root, "dev_databases")
    for db_id in sorted(os.listdir(db_root)):
        path = os.path.join(db_root, db_id, f"{db_id}.sqlite")
        with open(path, "rb") as fh:
            sums[db_id] = hashlib.sha256(fh.read()).hexdigest()
    return sums


@pytest.fixture(scope="session", autouse=True)
def initial_db_checksums(fixture_root):
    # autouse so the baseline is captured before any test touches a database
    return db_checksums(fixture_root)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, from real outcomes."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"),
                          ("error", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if status == "passed" and report.when != "call":
                continue
            name = nodeid.split("::")[-1].replace("test_", "", 1)
            lines.append((name, label))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, label in lines:
            terminalreporter.write_line(f"{label}  {name}")
