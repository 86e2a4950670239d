"""HTTP facade over the environment: episode lifecycle, stepping, metadata.

Environment-level failures (bad actions, engine errors) are protocol
successes: they come back as 200 responses whose observation has class
ErrorFeedback. Only transport-level problems (unknown ids, finished episodes,
malformed requests) map to 4xx/5xx.
"""
from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import __version__
from ..actions import catalog
from ..engine import EngineError, EngineErrorCode
from ..errors import EpisodeOverError, QueryGymError, TaskInvalidError
from .sessions import SessionManager, UnknownSessionError, UnknownTaskError


class CreateEpisodeRequest(BaseModel):
    task_id: str
    config: Optional[dict[str, Any]] = None


class ObservationModel(BaseModel):
    klass: str
    text: str
    structured: Optional[dict[str, Any]] = None


class CreateEpisodeResponse(BaseModel):
    session_id: str
    observation: ObservationModel


class StepRequest(BaseModel):
    action: str = Field(min_length=1)


class RewardModel(BaseModel):
    value: float
    relation: str


class StepResponse(BaseModel):
    observation: ObservationModel
    reward: RewardModel
    terminated: bool
    truncated: bool
    info: dict[str, Any]


class TaskSummary(BaseModel):
    task_id: str
    question: str
    dialect: str
    remediation: bool


class ActionEntry(BaseModel):
    name: str
    kind: str
    description: str
    usage: str
    required_params: list[dict[str, str]]
    optional_params: list[dict[str, str]]


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="querygym", version=__version__)
    app.state.manager = manager

    @app.get("/v1/tasks", response_model=list[TaskSummary])
    def list_tasks():
        return [
            TaskSummary(task_id=t.task_id, question=t.question,
                        dialect=t.dialect.value, remediation=t.is_remediation)
            for t in manager.list_tasks()
        ]

    @app.get("/v1/actions", response_model=list[ActionEntry])
    def list_actions():
        return [
            ActionEntry(
                name=spec.name, kind=spec.kind.value,
                description=spec.description, usage=spec.usage,
                required_params=[{"name": p.name, "shape": p.shape}
                                 for p in spec.required_params],
                optional_params=[{"name": p.name, "shape": p.shape}
                                 for p in spec.optional_params],
            )
            for spec in catalog()
        ]

    @app.post("/v1/episodes", response_model=CreateEpisodeResponse,
              status_code=201)
    def create_episode(request: CreateEpisodeRequest):
        try:
            session_id, observation = manager.create(
                request.task_id, request.config)
        except UnknownTaskError:
            raise HTTPException(404, detail="unknown_task")
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc))
        except TaskInvalidError as exc:
            raise HTTPException(422, detail=str(exc))
        except EngineError as exc:
            if exc.code == EngineErrorCode.CONNECTION:
                raise HTTPException(503, detail=exc.engine_message)
            raise HTTPException(500, detail=exc.engine_message)
        return CreateEpisodeResponse(
            session_id=session_id,
            observation=ObservationModel(**observation.to_json()))

    @app.post("/v1/episodes/{session_id}/step", response_model=StepResponse)
    def step_episode(session_id: str, request: StepRequest):
        if not request.action.strip():
            raise HTTPException(422, detail="empty action")
        try:
            result = manager.step(session_id, request.action)
        except UnknownSessionError:
            raise HTTPException(404, detail="unknown_session")
        except EpisodeOverError:
            raise HTTPException(410, detail="episode_over")
        return StepResponse(
            observation=ObservationModel(**result.observation.to_json()),
            reward=RewardModel(**result.reward.to_json()),
            terminated=result.terminated,
            truncated=result.truncated,
            info=result.info,
        )

    @app.get("/v1/episodes/{session_id}/trajectory")
    def get_trajectory(session_id: str):
        try:
            record = manager.trajectory(session_id)
        except UnknownSessionError:
            raise HTTPException(404, detail="unknown_session")
        return JSONResponse(record.to_json())

    @app.delete("/v1/episodes/{session_id}", status_code=204)
    def abandon_episode(session_id: str):
        try:
            manager.abandon(session_id)
        except UnknownSessionError:
            raise HTTPException(404, detail="unknown_session")

    return app
