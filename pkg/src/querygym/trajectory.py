"""Trajectory recording and JSONL persistence.

One episode is one TrajectoryRecord, written as a single JSON document per
line. The clock is injectable so replay tests can produce byte-identical
files.
"""
from __future__ import annotations

import json
import time
from typing import Callable, Optional

from .errors import BadTrajectoryError
from .model import EpisodeStatus, Observation, RewardSignal, TrajectoryRecord, TrajectoryStep


def monotonic_ms() -> int:
    return int(time.monotonic() * 1000)


class TrajectoryRecorder:
    def __init__(self, task_id: str, seed: int,
                 clock: Callable[[], int] = monotonic_ms):
        self._clock = clock
        self._last = clock()
        self.record = TrajectoryRecord(task_id=task_id, seed=seed)

    def append(self, raw_action_text: str, observation: Observation,
               reward: RewardSignal, info: Optional[dict] = None) -> None:
        now = self._clock()
        wall_ms = max(0, now - self._last)
        self._last = now
        self.record.steps.append(TrajectoryStep(
            step_index=len(self.record.steps),
            raw_action_text=raw_action_text,
            observation=observation,
            reward=reward,
            wall_ms=wall_ms,
        ))
        if info and info.get("new_cte_id"):
            structured = observation.structured or {}
            self.record.lineage.append({
                "cte_id": info["new_cte_id"],
                "parent_ids": structured.get("parent_ids", []),
            })

    def finish(self, status: EpisodeStatus) -> TrajectoryRecord:
        self.record.status = status
        return self.record


def write_trajectory(path: str, record: TrajectoryRecord) -> None:
    with open(path, "a") as fh:
        fh.write(record.to_jsonl_line() + "\n")


def read_trajectories(path: str) -> list[TrajectoryRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(TrajectoryRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise BadTrajectoryError(
                    f"bad trajectory record at line {lineno}: {exc}")
    if not records:
        raise BadTrajectoryError("trajectory file contains no records")
    return records
