"""Reference LLM policy over any chat-completions-compatible HTTP endpoint.

The policy sees only observation text (never gold SQL or the target table);
the prompt template below is versioned in-repo so runs are reproducible
against a fixed template.
"""
from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass, field
from typing import Optional

API_KEY_ENV = "QUERYGYM_LLM_API_KEY"

PROMPT_TEMPLATE = """You are a query-planning agent working against a \
relational database through a fixed action catalog. Each turn, reply with \
exactly one action as a single line of the form:

Action: ["action_name", "arg1", ...]

Build up the answer step by step: explore first if unsure, then apply \
relational algebra operations. Intermediate results are named T_0, T_1, ... \
and can be used as table ids in later actions. The episode ends when your \
latest intermediate table matches the expected answer.

Available actions:
{catalog_help}
"""

_ACTION_LINE = re.compile(r"^\s*Action\s*:\s*(\[.*)$", re.MULTILINE)


def extract_action_text(reply: str) -> Optional[str]:
    """First `Action: [...]` line, else the first bracketed array."""
    match = _ACTION_LINE.search(reply)
    if match:
        return match.group(1).strip()
    idx = reply.find("[")
    if idx >= 0:
        return reply[idx:].split("\n", 1)[0].strip()
    return None


class EndpointError(Exception):
    pass


@dataclass
class ChatCompletionsPolicy:
    endpoint_url: str
    model: str
    catalog_help: str
    temperature: float = 0.0
    max_retries: int = 3
    backoff_seconds: float = 1.0
    timeout: float = 120.0
    _messages: list[dict] = field(default_factory=list)

    def start(self, overview_text: str) -> None:
        self._messages = [
            {"role": "system",
             "content": PROMPT_TEMPLATE.format(catalog_help=self.catalog_help)},
            {"role": "user", "content": overview_text},
        ]

    def next_action(self, observation_text: Optional[str] = None) -> str:
        """Feed the latest observation (None on the first turn), get an action."""
        if observation_text is not None:
            self._messages.append({"role": "user", "content": observation_text})
        reply = self._complete()
        self._messages.append({"role": "assistant", "content": reply})
        action = extract_action_text(reply)
        # No array in the reply: pass the raw reply through; the parser will
        # turn it into ErrorFeedback and the loop continues.
        return action if action is not None else reply

    def _complete(self) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "messages": self._messages,
            "temperature": self.temperature,
        }
        last_error: Optional[Exception] = None
        for attempt in range(self.max_retries):
            try:
                response = httpx.post(self.endpoint_url, json=payload,
                                      headers=headers, timeout=self.timeout)
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"]
            except Exception as exc:
                last_error = exc
                if attempt < self.max_retries - 1:
                    time.sleep(self.backoff_seconds * (2 ** attempt))
        raise EndpointError(f"endpoint failed after {self.max_retries} "
                            f"attempts: {last_error}")
