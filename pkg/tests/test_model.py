import json
import math

import pytest

from querygym.model import (
    CellType,
    CteEntry,
    EpisodeState,
    Observation,
    ObservationClass,
    ResultTable,
    RewardSignal,
    SchemaInfo,
    TableRelationKind,
    TrajectoryRecord,
    TrajectoryStep,
    cell_from_json,
    cell_to_json,
    infer_column_type,
    next_cte_id,
    normalize_ingested,
)


def _blank_state():
    return EpisodeState(task=None, schema=SchemaInfo(tables=()))


class TestInferColumnType:
    def test_ints_with_null(self):
        assert infer_column_type([1, 2, None]) == CellType.INTEGER

    def test_numeric_widening(self):
        assert infer_column_type([1, 2.5]) == CellType.REAL

    def test_mixed_becomes_text(self):
        assert infer_column_type([1, "a"]) == CellType.TEXT

    def test_widening_lattice_all_pairs(self):
        # oracle: exhaustive check of the widening lattice over 2-element pairs
        samples = {
            CellType.BOOL: True,
            CellType.INTEGER: 3,
            CellType.REAL: 2.5,
            CellType.TEXT: "x",
            CellType.BLOB: b"\x00",
        }
        numeric = {CellType.BOOL, CellType.INTEGER, CellType.REAL}
        for ka, va in samples.items():
            for kb, vb in samples.items():
                got = infer_column_type([va, vb])
                if ka == kb:
                    expected = ka
                elif {ka, kb} <= numeric:
                    expected = (CellType.REAL if CellType.REAL in {ka, kb}
                                else CellType.INTEGER)
                else:
                    expected = CellType.TEXT
                assert got == expected, (ka, kb)

    def test_all_null(self):
        assert infer_column_type([None, None]) == CellType.NULL


def test_nan_normalizes_to_null():
    assert normalize_ingested(float("nan")) is None
    assert normalize_ingested(1.5) == 1.5
    table = ResultTable.from_rows(["x"], [(float("nan"),), (2.0,)])
    assert table.rows[0][0] is None


class TestNextCteId:
    def test_empty_registry(self):
        assert next_cte_id(_blank_state()) == "T_0"

    def test_counter(self):
        state = _blank_state()
        for i in range(3):
            state.ctes.append(CteEntry(f"T_{i}", None, "SELECT 1", []))
        assert next_cte_id(state) == "T_3"

    def test_unchanged_after_failed_op(self):
        state = _blank_state()
        state.ctes.append(CteEntry("T_0", None, "SELECT 1", []))
        before = next_cte_id(state)
        # a failing op leaves the registry alone, so the id is stable
        assert next_cte_id(state) == before == "T_1"


class TestSerialization:
    def test_blob_round_trip(self):
        encoded = cell_to_json(b"\x01\x02")
        assert "$blob" in encoded
        assert cell_from_json(encoded) == b"\x01\x02"

    def test_result_table_round_trip(self):
        table = ResultTable.from_rows(
            ["a", "b"], [(1, "x"), (None, b"\xff")])
        again = ResultTable.from_json(table.to_json())
        assert again.rows == table.rows
        assert again.columns == table.columns

    def test_result_table_json_shape(self):
        table = ResultTable.from_rows(["a"], [(1,)])
        data = table.to_json()
        assert data == {"columns": [{"name": "a", "type": "integer"}],
                        "rows": [[1]], "truncated": False}

    def test_trajectory_round_trip(self):
        record = TrajectoryRecord(task_id="dev:0", seed=7)
        record.steps.append(TrajectoryStep(
            step_index=0, raw_action_text='["get_tables"]',
            observation=Observation(ObservationClass.EXPLORATION_RESULT, "hi"),
            reward=RewardSignal(0.0, TableRelationKind.NOT_CHECKED),
            wall_ms=3))
        line = record.to_jsonl_line()
        again = TrajectoryRecord.from_json(json.loads(line))
        assert again.to_jsonl_line() == line

    def test_row_width_checked(self):
        with pytest.raises(ValueError):
            ResultTable(columns=[("a", CellType.INTEGER)], rows=[(1, 2)])


def test_observation_tag_prefix():
    obs = Observation(ObservationClass.ERROR_FEEDBACK, "boom")
    assert obs.text.startswith("[ERROR]")
    # already tagged text is not double tagged
    again = Observation(ObservationClass.ERROR_FEEDBACK, obs.text)
    assert again.text == obs.text
