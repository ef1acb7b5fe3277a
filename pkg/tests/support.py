"""Fixture loaders and small fakes shared by the tests."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

from govaudit.chaindata import CreationRecord, normalize_address
from govaudit.chaindata.world import world_provider
from govaudit.evm.disasm import assemble

FIXTURES = Path(__file__).parent / "fixtures"
CACHE = FIXTURES / "cache"


@lru_cache(maxsize=None)
def compiled_records() -> tuple[dict, ...]:
    lines = (FIXTURES / "compiled.jsonl").read_text().splitlines()
    return tuple(json.loads(line) for line in lines)


def compiled(name: str, version: str = "0.8.26", optimize: bool = True) -> bytes:
    for rec in compiled_records():
        if rec["name"] == name and rec["compilerVersion"].startswith(version) and rec["optimize"] == optimize:
            return bytes.fromhex(rec["runtimeBytecodeHex"][2:])
    raise KeyError((name, version, optimize))


def asm(name: str) -> bytes:
    return assemble((FIXTURES / "asm" / f"{name}.asm").read_text())


@lru_cache(maxsize=None)
def addresses() -> dict[str, str]:
    return json.loads((FIXTURES / "addresses.json").read_text())


@lru_cache(maxsize=None)
def _world_text() -> str:
    return (FIXTURES / "world.json").read_text()


def world() -> dict:
    return json.loads(_world_text())


def live_world(**kw):
    """A provider served in-process from the fixture world (no sockets)."""
    return world_provider(world(), "live", **kw)


class FakeChain:
    """Dict-backed provider for the governance analyses.

    ``accounts`` maps address -> {"code": bytes, "creator": addr, "kind": ..., "source": ...}.
    """

    def __init__(self, accounts: dict, storage: dict | None = None, verified: set | None = None):
        self.accounts = {normalize_address(k): v for k, v in accounts.items()}
        self.storage = storage or {}
        self.verified = {normalize_address(v) for v in (verified or ())}
        self.calls: list[tuple] = []

    def get_code(self, address: str) -> bytes:
        self.calls.append(("code", address))
        return self.accounts.get(normalize_address(address), {}).get("code", b"")

    def get_creation(self, address: str) -> CreationRecord | None:
        self.calls.append(("creation", address))
        acct = self.accounts.get(normalize_address(address))
        if not acct or "creator" not in acct:
            return None
        return CreationRecord(
            normalize_address(address),
            normalize_address(acct["creator"]),
            acct.get("tx", "0x" + "00" * 32),
            acct.get("kind", "CREATE"),
            acct.get("source", "trace"),
        )

    def get_storage(self, address: str, slot: int) -> bytes:
        return self.storage.get((normalize_address(address), slot), b"\0" * 32)

    def is_verified(self, address: str) -> bool:
        return normalize_address(address) in self.verified


def addr(n: int) -> str:
    return "0x" + n.to_bytes(20, "big").hex()
