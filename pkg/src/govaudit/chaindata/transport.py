from __future__ import annotations

from typing import Any, Protocol

import requests

from govaudit.chaindata.errors import TransportError


class Transport(Protocol):
    def post_json(self, url: str, payload: dict) -> Any: ...

    def get_json(self, url: str, params: dict) -> Any: ...


class HttpTransport:
    def __init__(self, timeout: float = 30.0, session: requests.Session | None = None):
        self.timeout = timeout
        self.session = session or requests.Session()

    def _check(self, resp: requests.Response) -> Any:
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code} from {resp.url}")
        resp.raise_for_status()
        return resp.json()

    def post_json(self, url: str, payload: dict) -> Any:
        try:
            return self._check(self.session.post(url, json=payload, timeout=self.timeout))
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc

    def get_json(self, url: str, params: dict) -> Any:
        try:
            return self._check(self.session.get(url, params=params, timeout=self.timeout))
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
