"""The POMDP loop: reset, step, reward, termination.

Errors never crash an episode: parse failures, compile failures, and engine
failures all become ErrorFeedback observations and leave the CTE registry
untouched. Every step (including failed ones and exploration probes) consumes
one unit of the step budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .actions import ActionKind, parse_action
from .compiler import CompiledStep, compile_command, compose_with_chain
from .dialect import DialectProfile, profile_for
from .engine import EngineError, ExecLimits, open_engine
from .equivalence import TableRelation, align_and_compare
from .errors import EpisodeOverError, QueryGymError, TaskInvalidError
from .explorer import Explorer, ObservationCaps, render_grid
from .model import (
    CteEntry,
    EpisodeState,
    Observation,
    ObservationClass,
    ResultTable,
    RewardSignal,
    Task,
    TableRelationKind,
    next_cte_id,
)


@dataclass(frozen=True)
class EnvConfig:
    max_steps: int = 30
    terminal_reward: float = 1.0
    partial_reward: float = 0.1
    limits: ExecLimits = field(default_factory=ExecLimits)
    caps: ObservationCaps = field(default_factory=ObservationCaps)
    multiset_rows: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class StepResult:
    observation: Observation
    reward: RewardSignal
    terminated: bool
    truncated: bool
    info: dict


def error_observation(code: str, message: str,
                      usage: Optional[str] = None) -> Observation:
    lines = [f"{code}: {message}"]
    if usage:
        lines.append(f"usage: {usage}")
    return Observation(ObservationClass.ERROR_FEEDBACK, "\n".join(lines),
                       structured={"error_code": code, "message": message,
                                   "usage": usage})


def cte_info_observation(entry: CteEntry, cell_width: int = 64) -> Observation:
    preview = entry.cached_preview
    cols = ", ".join(f"{n}:{t.value}" for n, t in preview.columns)
    lines = [
        f"Created {entry.cte_id} ({entry.cached_row_count} rows)",
        f"columns: {cols}",
        render_grid(preview, cell_width),
    ]
    return Observation(
        ObservationClass.INTERMEDIATE_CTE_INFO, "\n".join(lines),
        structured={"cte_id": entry.cte_id,
                    "row_count": entry.cached_row_count,
                    "parent_ids": list(entry.parent_ids),
                    "preview": preview.to_json()})


class Environment:
    """One episode over one database; owns its engine connection."""

    def __init__(self, task: Task, config: EnvConfig = EnvConfig(),
                 target: Optional[ResultTable] = None):
        self.task = task
        self.config = config
        self.dialect: DialectProfile = profile_for(task.dialect)
        self.engine = open_engine(task.db_ref, task.dialect,
                                  timeout_ms=config.limits.timeout_ms)
        self.state: Optional[EpisodeState] = None
        self._target = target

    def close(self) -> None:
        self.engine.close()

    # -- reset ---------------------------------------------------------------

    def _materialize_target(self) -> ResultTable:
        from .dataset import materialize_target
        return materialize_target(self.task, self.engine, self.config.limits)

    def reset(self) -> tuple[EpisodeState, Observation]:
        if self._target is None:
            self._target = self._materialize_target()
        schema = self.engine.fetch_schema()
        self.state = EpisodeState(
            task=self.task, schema=schema, seed=self.config.seed)

        seed_error: Optional[str] = None
        if self.task.initial_sql:
            seed_error = self._seed_initial_cte(self.task.initial_sql)

        explorer = self._explorer()
        overview = explorer.explore(parse_action('["get_overview"]'))
        text = overview.text
        if self.state.ctes:
            entry = self.state.ctes[0]
            cte_obs = cte_info_observation(entry, self.config.caps.cell_width)
            text += ("\nThe provided initial query was executed as the first "
                     "action:\n" + cte_obs.text.split("\n", 1)[1])
        elif seed_error is not None:
            text += ("\nThe provided initial query failed:\n" + seed_error)
        obs = Observation(ObservationClass.OVERVIEW, text,
                          structured=overview.structured)
        return self.state, obs

    def _seed_initial_cte(self, initial_sql: str) -> Optional[str]:
        sql = initial_sql.strip().rstrip(";").strip()
        try:
            result = self.engine.run_select(
                f"SELECT * FROM ({sql}) AS seed_query", self.config.limits)
        except EngineError as exc:
            return f"{exc.code.value}: {exc.engine_message}"
        preview_rows = result.rows[: self.config.caps.preview_rows]
        preview = ResultTable(columns=result.columns, rows=preview_rows)
        entry = CteEntry(
            cte_id="T_0", source_op=None,
            sql_text=f"SELECT * FROM ({sql}) AS seed_query",
            parent_ids=[], cached_preview=preview,
            cached_row_count=len(result.rows) if not result.truncated else None)
        self.state.ctes.append(entry)
        return None

    # -- step ----------------------------------------------------------------

    def _explorer(self) -> Explorer:
        return Explorer(self.state, self.engine, self.dialect,
                        self.config.limits, self.config.caps,
                        max_steps=self.config.max_steps)

    def step(self, raw_text: str) -> StepResult:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        if self.state.over:
            raise EpisodeOverError("episode already terminated or truncated")

        info: dict = {}
        reward = RewardSignal(0.0, TableRelationKind.NOT_CHECKED)
        try:
            cmd = parse_action(raw_text)
        except QueryGymError as exc:
            obs = error_observation(exc.code, exc.message, exc.usage)
            info["error_code"] = exc.code
            return self._finish(obs, reward, info)

        if cmd.kind == ActionKind.EXPLORATION:
            try:
                obs = self._explorer().explore(cmd)
            except QueryGymError as exc:
                obs = error_observation(exc.code, exc.message, exc.usage)
                info["error_code"] = exc.code
            except EngineError as exc:
                obs = error_observation(exc.code.value, exc.engine_message)
                info["error_code"] = exc.code.value
            return self._finish(obs, reward, info)

        # relational algebra action
        try:
            step = compile_command(cmd, self.state, self.dialect)
        except QueryGymError as exc:
            obs = error_observation(exc.code, exc.message, exc.usage)
            info["error_code"] = exc.code
            return self._finish(obs, reward, info)

        full_sql = compose_with_chain(step, self.state)
        info["sql"] = full_sql
        try:
            result = self.engine.run_select(full_sql, self.config.limits)
        except EngineError as exc:
            obs = error_observation(exc.code.value, exc.engine_message,
                                    cmd.spec.usage)
            info["error_code"] = exc.code.value
            return self._finish(obs, reward, info)

        row_count: Optional[int] = len(result.rows)
        if result.truncated:
            try:
                count_table = self.engine.run_select(
                    f"SELECT COUNT(*) FROM ({full_sql}) AS capped",
                    self.config.limits)
                row_count = int(count_table.rows[0][0])
            except EngineError:
                row_count = None

        preview = ResultTable(
            columns=result.columns,
            rows=result.rows[: self.config.caps.preview_rows])
        entry = CteEntry(
            cte_id=step.new_cte_id, source_op=cmd, sql_text=step.select_sql,
            parent_ids=list(step.referenced), cached_preview=preview,
            cached_row_count=row_count)
        self.state.ctes.append(entry)
        info["new_cte_id"] = entry.cte_id

        if result.truncated:
            relation = TableRelation(TableRelationKind.OTHER)
            info["comparison_diagnostic"] = (
                "result exceeded the row cap; equivalence not checked")
        else:
            relation = align_and_compare(result, self._target,
                                         multiset=self.config.multiset_rows)
        info["relation"] = relation.relation.value
        reward = self._reward_for(relation)

        obs = cte_info_observation(entry, self.config.caps.cell_width)
        terminated = relation.is_equivalent
        return self._finish(obs, reward, info, terminated=terminated)

    def _reward_for(self, relation: TableRelation) -> RewardSignal:
        kind = relation.relation
        if kind == TableRelationKind.EQUIVALENT:
            return RewardSignal(self.config.terminal_reward, kind)
        if kind in (TableRelationKind.SUBSET, TableRelationKind.SUPERSET):
            if not self.state.partial_reward_granted:
                self.state.partial_reward_granted = True
                return RewardSignal(self.config.partial_reward, kind)
            return RewardSignal(0.0, kind)
        return RewardSignal(0.0, kind)

    def _finish(self, obs: Observation, reward: RewardSignal, info: dict,
                terminated: bool = False) -> StepResult:
        self.state.step_count += 1
        truncated = False
        if terminated:
            self.state.terminated = True
        elif self.state.step_count >= self.config.max_steps:
            self.state.truncated = True
            truncated = True
        return StepResult(observation=obs, reward=reward,
                          terminated=terminated, truncated=truncated,
                          info=info)


def reset_environment(task: Task, config: EnvConfig = EnvConfig()):
    """Convenience: build an Environment and reset it in one call."""
    env = Environment(task, config)
    try:
        state, obs = env.reset()
    except (EngineError, QueryGymError) as exc:
        env.close()
        if isinstance(exc, TaskInvalidError):
            raise
        raise TaskInvalidError(str(exc))
    return env, state, obs
