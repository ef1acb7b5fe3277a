"""On-disk response cache: one JSON file per request key."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any

CACHE_VERSION = 1


def cache_key(chain_id: int, method: str, params: list) -> tuple[dict, str]:
    key = {"chainId": chain_id, "method": method, "params": params}
    canonical = json.dumps(key, sort_keys=True, separators=(",", ":"))
    return key, hashlib.sha256(canonical.encode()).hexdigest()


class ResponseCache:
    """Maps request keys to recorded outcomes.

    File layout: ``<dir>/<sha256>.json`` containing
    ``{"govauditCache": 1, "key": {...}, "value": ...}`` or, for recorded
    failures, ``"error": {"kind": ..., "message": ...}`` instead of value.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path(self, digest: str) -> Path:
        return self.directory / f"{digest}.json"

    def get(self, digest: str) -> dict | None:
        p = self.path(digest)
        if not p.exists():
            return None
        entry = json.loads(p.read_text())
        if entry.get("govauditCache") != CACHE_VERSION:
            raise ValueError(f"{p}: unsupported cache version {entry.get('govauditCache')!r}")
        return entry

    def put(self, key: dict, digest: str, value: Any = None, error: dict | None = None) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        entry: dict[str, Any] = {"govauditCache": CACHE_VERSION, "key": key}
        if error is not None:
            entry["error"] = error
        else:
            entry["value"] = value
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(entry, fh, sort_keys=True, indent=1)
            fh.write("\n")
        os.replace(tmp, self.path(digest))

    def __len__(self) -> int:
        return sum(1 for _ in self.directory.glob("*.json")) if self.directory.exists() else 0
