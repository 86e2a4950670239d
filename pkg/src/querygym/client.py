"""Uniform episode client: in-process session manager or remote HTTP service.

Both flavors speak the service wire format (plain dicts), so the CLI commands
behave identically whether they target a running server or run standalone.
"""
from __future__ import annotations

from typing import Any, Optional

from .errors import EpisodeOverError
from .service.sessions import SessionManager, UnknownSessionError, UnknownTaskError


class ClientError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(f"{status}: {detail}")
        self.status = status
        self.detail = detail


class LocalClient:
    def __init__(self, manager: SessionManager):
        self.manager = manager

    def list_tasks(self) -> list[dict]:
        return [
            {"task_id": t.task_id, "question": t.question,
             "dialect": t.dialect.value, "remediation": t.is_remediation}
            for t in self.manager.list_tasks()
        ]

    def actions(self) -> list[dict]:
        from .actions import catalog
        return [
            {"name": s.name, "kind": s.kind.value,
             "description": s.description, "usage": s.usage}
            for s in catalog()
        ]

    def create(self, task_id: str,
               overrides: Optional[dict] = None) -> tuple[str, dict]:
        try:
            session_id, obs = self.manager.create(task_id, overrides)
        except UnknownTaskError:
            raise ClientError(404, "unknown_task")
        except ValueError as exc:
            raise ClientError(422, str(exc))
        return session_id, obs.to_json()

    def step(self, session_id: str, action: str) -> dict:
        try:
            result = self.manager.step(session_id, action)
        except UnknownSessionError:
            raise ClientError(404, "unknown_session")
        except EpisodeOverError:
            raise ClientError(410, "episode_over")
        return {
            "observation": result.observation.to_json(),
            "reward": result.reward.to_json(),
            "terminated": result.terminated,
            "truncated": result.truncated,
            "info": result.info,
        }

    def trajectory(self, session_id: str) -> dict:
        try:
            return self.manager.trajectory(session_id).to_json()
        except UnknownSessionError:
            raise ClientError(404, "unknown_session")

    def abandon(self, session_id: str) -> None:
        try:
            self.manager.abandon(session_id)
        except UnknownSessionError:
            pass


class HttpClient:
    def __init__(self, base_url: str, timeout: float = 60.0):
        import httpx
        self._http = httpx.Client(base_url=base_url.rstrip("/"),
                                  timeout=timeout)

    def _check(self, response) -> Any:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise ClientError(response.status_code, str(detail))
        if response.status_code == 204:
            return None
        return response.json()

    def list_tasks(self) -> list[dict]:
        return self._check(self._http.get("/v1/tasks"))

    def actions(self) -> list[dict]:
        return self._check(self._http.get("/v1/actions"))

    def create(self, task_id: str,
               overrides: Optional[dict] = None) -> tuple[str, dict]:
        payload: dict = {"task_id": task_id}
        if overrides:
            payload["config"] = overrides
        data = self._check(self._http.post("/v1/episodes", json=payload))
        return data["session_id"], data["observation"]

    def step(self, session_id: str, action: str) -> dict:
        return self._check(self._http.post(
            f"/v1/episodes/{session_id}/step", json={"action": action}))

    def trajectory(self, session_id: str) -> dict:
        return self._check(self._http.get(
            f"/v1/episodes/{session_id}/trajectory"))

    def abandon(self, session_id: str) -> None:
        try:
            self._check(self._http.delete(f"/v1/episodes/{session_id}"))
        except ClientError:
            pass
