"""LLM clients: a plain HTTP endpoint and a scripted mock for tests."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol


class LlmError(Exception):
    """The LLM could not produce a response."""


class LlmTransportError(LlmError):
    """A retriable failure talking to the endpoint."""


class ScriptExhausted(LlmError):
    """No scripted response matches the prompt."""


class LlmClient(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass
class ScriptRecord:
    match_substring: str
    response_text: str
    repeat: bool = False


class ScriptedLlm:
    """Answers prompts from an ordered script.

    Each prompt is served by the first unused record whose ``matchSubstring``
    occurs in it.  Records are used once unless ``repeat`` is set, so a run
    of records with the same substring plays back in order.
    """

    def __init__(self, records: list[ScriptRecord]):
        self.records = list(records)
        self._used = [False] * len(self.records)
        self._lock = threading.Lock()
        self.prompts: list[str] = []

    @classmethod
    def from_jsonl(cls, path: str | Path) -> ScriptedLlm:
        records = []
        for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                records.append(ScriptRecord(raw["matchSubstring"], raw["responseText"], bool(raw.get("repeat", False))))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{n}: bad script record: {exc}") from exc
        return cls(records)

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.prompts.append(prompt)
            for i, rec in enumerate(self.records):
                if self._used[i] or rec.match_substring not in prompt:
                    continue
                if not rec.repeat:
                    self._used[i] = True
                return rec.response_text
        raise ScriptExhausted(f"no scripted response for prompt starting {prompt[:80]!r}")


class HttpLlmClient:
    """POSTs ``{"model", "prompt"}`` and reads ``{"text"}`` back."""

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        model: str | None = None,
        timeout: float = 120.0,
        session=None,
    ):
        import requests

        self.url = url
        self.api_key = api_key
        self.model = model
        self.timeout = timeout
        self.session = session or requests.Session()

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> HttpLlmClient:
        env = os.environ if env is None else env
        url = env.get("GOVAUDIT_LLM_URL")
        if not url:
            raise LlmError("GOVAUDIT_LLM_URL is not set")
        return cls(url, env.get("GOVAUDIT_LLM_KEY"), env.get("GOVAUDIT_LLM_MODEL"))

    def complete(self, prompt: str) -> str:
        import requests

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {"prompt": prompt}
        if self.model:
            body["model"] = self.model
        try:
            resp = self.session.post(self.url, json=body, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LlmTransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise LlmTransportError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise LlmError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return str(resp.json()["text"])
        except (ValueError, KeyError) as exc:
            raise LlmError(f"malformed response: {exc}") from exc


def complete_with_retry(client: LlmClient, prompt: str, attempts: int = 3, backoff: float = 0.5) -> str:
    """Retry transport failures with exponential backoff."""
    for attempt in range(attempts):
        try:
            return client.complete(prompt)
        except LlmTransportError:
            if attempt == attempts - 1:
                raise
            time.sleep(backoff * (2**attempt))
    raise AssertionError("unreachable")
