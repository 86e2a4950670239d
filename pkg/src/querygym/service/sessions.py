"""Episode session registry shared by the HTTP service and the local CLI client.

Each session owns one environment (and thus one database connection). Steps on
one session are serialized by a per-session lock; distinct sessions are fully
independent. Sessions idle past the TTL are evicted and their trajectory is
flushed to disk.
"""
from __future__ import annotations

import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..env import EnvConfig, Environment, StepResult
from ..errors import EpisodeOverError, QueryGymError
from ..engine import EngineError, EngineErrorCode
from ..model import EpisodeStatus, Observation, Task, TrajectoryRecord
from ..trajectory import TrajectoryRecorder, monotonic_ms, write_trajectory


class UnknownTaskError(KeyError):
    pass


class UnknownSessionError(KeyError):
    pass


_OVERRIDABLE = {"max_steps": int, "seed": int, "terminal_reward": float,
                "partial_reward": float, "multiset_rows": bool}


def apply_overrides(config: EnvConfig, overrides: Optional[dict]) -> EnvConfig:
    if not overrides:
        return config
    kwargs = {}
    for key, value in overrides.items():
        if key not in _OVERRIDABLE:
            raise ValueError(f"unknown config override {key!r}")
        caster = _OVERRIDABLE[key]
        try:
            kwargs[key] = caster(value)
        except (TypeError, ValueError):
            raise ValueError(f"override {key!r} must be {caster.__name__}")
    from dataclasses import replace
    return replace(config, **kwargs)


@dataclass
class Session:
    session_id: str
    env: Environment
    recorder: TrajectoryRecorder
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: float = field(default_factory=time.monotonic)
    last_active: float = field(default_factory=time.monotonic)
    flushed: bool = False


class SessionManager:
    def __init__(self, tasks: list[Task], config: EnvConfig = EnvConfig(),
                 trajectory_dir: Optional[str] = None,
                 ttl_seconds: float = 1800.0,
                 clock: Callable[[], int] = monotonic_ms):
        self._tasks = {t.task_id: t for t in tasks}
        self._config = config
        self._trajectory_dir = trajectory_dir
        self._ttl = ttl_seconds
        self._clock = clock
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        if trajectory_dir:
            os.makedirs(trajectory_dir, exist_ok=True)

    # -- lookups -------------------------------------------------------------

    def list_tasks(self) -> list[Task]:
        return list(self._tasks.values())

    def get_task(self, task_id: str) -> Task:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise UnknownTaskError(task_id)

    def _get_session(self, session_id: str) -> Session:
        self.evict_idle()
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(session_id)
        session.last_active = time.monotonic()
        return session

    # -- lifecycle -----------------------------------------------------------

    def create(self, task_id: str,
               overrides: Optional[dict] = None) -> tuple[str, Observation]:
        task = self.get_task(task_id)
        config = apply_overrides(self._config, overrides)
        env = Environment(task, config)
        try:
            _, observation = env.reset()
        except Exception:
            env.close()
            raise
        session_id = secrets.token_hex(16)
        recorder = TrajectoryRecorder(task_id, config.seed, clock=self._clock)
        session = Session(session_id=session_id, env=env, recorder=recorder)
        with self._registry_lock:
            self._sessions[session_id] = session
        return session_id, observation

    def step(self, session_id: str, action: str) -> StepResult:
        session = self._get_session(session_id)
        with session.lock:
            if session.env.state is None or session.env.state.over:
                raise EpisodeOverError("episode is over")
            result = session.env.step(action)
            session.recorder.append(action, result.observation, result.reward,
                                    result.info)
            if result.terminated or result.truncated:
                status = (EpisodeStatus.SOLVED if result.terminated
                          else EpisodeStatus.STEP_LIMIT)
                self._flush(session, status)
            return result

    def trajectory(self, session_id: str) -> TrajectoryRecord:
        session = self._get_session(session_id)
        return session.recorder.record

    def abandon(self, session_id: str) -> None:
        session = self._get_session(session_id)
        with session.lock:
            self._flush(session, EpisodeStatus.ABANDONED)
        with self._registry_lock:
            self._sessions.pop(session_id, None)
        session.env.close()

    def evict_idle(self) -> None:
        now = time.monotonic()
        stale = []
        with self._registry_lock:
            for sid, session in list(self._sessions.items()):
                if now - session.last_active > self._ttl:
                    stale.append(session)
                    del self._sessions[sid]
        for session in stale:
            with session.lock:
                self._flush(session, EpisodeStatus.ABANDONED)
            session.env.close()

    def close(self) -> None:
        with self._registry_lock:
            sessions = list(self._sessions.values())
            self._sessions.clear()
        for session in sessions:
            with session.lock:
                self._flush(session, EpisodeStatus.ABANDONED)
            session.env.close()

    def _flush(self, session: Session, status: EpisodeStatus) -> None:
        if session.flushed:
            return
        record = session.recorder.finish(status)
        if self._trajectory_dir:
            path = os.path.join(self._trajectory_dir,
                                f"{session.session_id}.jsonl")
            write_trajectory(path, record)
        session.flushed = True
