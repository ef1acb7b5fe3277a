"""Chain data behind one interface: JSON-RPC node, scanner, signature DB.

Every request is keyed by ``(chainId, method, params)``.  In ``replay`` mode
responses come only from the cache and no transport is ever built; in
``record`` mode each live response is written to the cache before it is
returned.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable

from govaudit.abi import DecodeError, abi_entry_signature, decode_values, parse_type
from govaudit.chaindata.cache import ResponseCache, cache_key
from govaudit.chaindata.config import ConfigurationError, ProviderConfig
from govaudit.chaindata.errors import (
    CapabilityError,
    ChainDataError,
    ReplayMissError,
    TransportError,
)
from govaudit.chaindata.transport import HttpTransport, Transport
from govaudit.evm.disasm import to_bytes

log = logging.getLogger(__name__)

SYMBOL_SELECTOR = bytes.fromhex("95d89b41")
DECIMALS_SELECTOR = bytes.fromhex("313ce567")
# JSON-RPC "method not found" / "method not supported"
_UNSUPPORTED_CODES = {-32601, -32004}


def normalize_address(address: str | bytes) -> str:
    raw = to_bytes(address)
    if len(raw) != 20:
        raise ValueError(f"address must be 20 bytes, got {len(raw)}")
    return "0x" + raw.hex()


@dataclass(frozen=True)
class CreationRecord:
    address: str
    creator: str
    tx_id: str
    kind: str  # "CREATE" | "CREATE2"
    kind_source: str  # "trace" | "record" | "assumed"


@dataclass(frozen=True)
class ContractMetadata:
    address: str
    verified: bool
    abi: tuple[str, ...] | None = None  # canonical function signatures
    name_tag: str | None = None
    symbol: str | None = None
    contract_name: str | None = None

    def __post_init__(self) -> None:
        if self.abi is not None and not self.verified:
            raise ValueError("an ABI is only available for verified contracts")


def decode_text_result(raw: bytes | None) -> str | None:
    """Decode a ``string`` or ``bytes32`` return value (both occur for symbol())."""
    if not raw:
        return None
    try:
        (text,) = decode_values([parse_type("string")], raw)
        return text or None
    except DecodeError:
        pass
    if len(raw) == 32:
        text = raw.rstrip(b"\0")
        try:
            return text.decode("utf-8") or None
        except UnicodeDecodeError:
            return None
    return None


class ChainData:
    def __init__(self, config: ProviderConfig, transport: Transport | None = None):
        self.config = config
        self.cache = ResponseCache(config.cache_dir) if config.cache_dir is not None else None
        self._transport = transport
        self._gate = threading.BoundedSemaphore(config.max_in_flight)
        self._memo: dict[str, Any] = {}
        self._lock = threading.Lock()
        self.network_calls = 0

    @property
    def mode(self) -> str:
        return self.config.mode

    @property
    def transport(self) -> Transport:
        if self.config.mode == "replay":
            raise AssertionError("replay mode never touches the network")
        if self._transport is None:
            self._transport = HttpTransport()
        return self._transport

    # ------------------------------------------------------------ plumbing

    def _fetch(self, method: str, params: list, live: Callable[[], Any]) -> Any:
        key, digest = cache_key(self.config.chain_id, method, params)
        with self._lock:
            if digest in self._memo:
                return self._unpack(self._memo[digest])
        if self.config.mode == "replay":
            entry = self.cache.get(digest)
            if entry is None:
                raise ReplayMissError(key, digest)
        else:
            try:
                entry = {"value": self._with_retry(live)}
            except CapabilityError as exc:
                entry = {"error": {"kind": "capability", "message": str(exc)}}
            if self.cache is not None:
                self.cache.put(key, digest, entry.get("value"), entry.get("error"))
        with self._lock:
            self._memo[digest] = entry
        return self._unpack(entry)

    @staticmethod
    def _unpack(entry: dict) -> Any:
        err = entry.get("error")
        if err is not None:
            if err["kind"] == "capability":
                raise CapabilityError(err["message"])
            raise ChainDataError(err["message"])
        return entry.get("value")

    def _with_retry(self, fn: Callable[[], Any]) -> Any:
        policy = self.config.retry
        delay = policy.backoff
        for attempt in range(1, policy.attempts + 1):
            try:
                with self._gate:
                    self.network_calls += 1
                    return fn()
            except TransportError as exc:
                if attempt == policy.attempts:
                    raise ChainDataError(f"giving up after {attempt} attempts: {exc}") from exc
                log.warning("transport error (attempt %d): %s", attempt, exc)
                time.sleep(delay)
                delay *= 2
        raise AssertionError("unreachable")

    def _endpoint(self, name: str) -> str:
        url = getattr(self.config, name)
        if not url:
            raise ConfigurationError(f"{name} is not configured")
        return url

    def _rpc(self, method: str, params: list, revert_ok: bool = False) -> Any:
        url = self._endpoint("rpc_endpoint")
        payload = {"jsonrpc": "2.0", "id": 1, "method": method, "params": params}
        resp = self.transport.post_json(url, payload)
        err = resp.get("error")
        if err:
            if err.get("code") in _UNSUPPORTED_CODES:
                raise CapabilityError(f"{method}: {err.get('message')}")
            if revert_ok:
                return None
            raise ChainDataError(f"{method}: {err.get('message')}")
        return resp.get("result")

    def _scanner(self, action: str, **params) -> Any:
        url = self._endpoint("scanner_endpoint")
        query = {"module": "contract", "action": action, **params}
        if self.config.scanner_key:
            query["apikey"] = self.config.scanner_key
        resp = self.transport.get_json(url, query)
        if str(resp.get("status")) != "1":
            result = resp.get("result")
            # "No data found" style answers are empty results, anything else is an error
            if isinstance(result, str) and "rate limit" in result.lower():
                raise TransportError(result)
            if resp.get("message", "").upper().startswith("NOTOK") and result not in (None, "", []):
                raise ChainDataError(f"scanner {action}: {result}")
            return None
        return resp.get("result")

    # ------------------------------------------------------------ node

    def get_code(self, address: str) -> bytes:
        addr = normalize_address(address)
        return to_bytes(self._fetch("eth_getCode", [addr], lambda: self._rpc("eth_getCode", [addr, "latest"])))

    def get_storage(self, address: str, slot: int) -> bytes:
        addr = normalize_address(address)
        slot_hex = hex(slot)
        raw = self._fetch(
            "eth_getStorageAt",
            [addr, slot_hex],
            lambda: self._rpc("eth_getStorageAt", [addr, slot_hex, "latest"]),
        )
        return to_bytes(raw).rjust(32, b"\0")

    def call(self, address: str, data: bytes) -> bytes | None:
        """``eth_call`` result bytes, or ``None`` when the call reverts."""
        addr = normalize_address(address)
        data_hex = "0x" + bytes(data).hex()
        raw = self._fetch(
            "eth_call",
            [addr, data_hex],
            lambda: self._rpc("eth_call", [{"to": addr, "data": data_hex}, "latest"], revert_ok=True),
        )
        return None if raw is None else to_bytes(raw)

    def get_trace_opcodes(self, tx_id: str) -> list[str]:
        def live() -> list[str]:
            opts = {"disableStack": True, "disableMemory": True, "disableStorage": True}
            result = self._rpc("debug_traceTransaction", [tx_id, opts])
            return [step["op"] for step in (result or {}).get("structLogs", [])]

        return list(self._fetch("debug_traceTransaction", [tx_id], live))

    # ------------------------------------------------------------ scanner

    def _creation_record(self, addr: str) -> dict | None:
        def live() -> dict | None:
            result = self._scanner("getcontractcreation", contractaddresses=addr)
            if not result:
                return None
            row = result[0]
            out = {"creator": normalize_address(row["contractCreator"]), "txHash": row["txHash"]}
            if row.get("creationKind"):
                out["creationKind"] = row["creationKind"].upper()
            return out

        return self._fetch("scanner.getcontractcreation", [addr], live)

    def get_creation(self, address: str) -> CreationRecord | None:
        """Creator, transaction and creation opcode, or ``None`` for EOAs."""
        addr = normalize_address(address)
        rec = self._creation_record(addr)
        if rec is None:
            return None
        try:
            ops = self.get_trace_opcodes(rec["txHash"])
            kind, source = ("CREATE2" if "CREATE2" in ops else "CREATE"), "trace"
        except CapabilityError:
            if rec.get("creationKind"):
                kind, source = rec["creationKind"], "record"
            else:
                kind, source = "CREATE", "assumed"
        return CreationRecord(addr, rec["creator"], rec["txHash"], kind, source)

    def _source(self, addr: str) -> dict:
        def live() -> dict:
            result = self._scanner("getsourcecode", address=addr)
            row = (result or [{}])[0]
            verified = bool(row.get("SourceCode"))
            abi = None
            if verified:
                try:
                    abi = json.loads(row.get("ABI") or "null")
                except json.JSONDecodeError:
                    abi = None
            return {"verified": verified, "abi": abi, "contractName": row.get("ContractName") or None}

        return self._fetch("scanner.getsourcecode", [addr], live)

    def is_verified(self, address: str) -> bool:
        return bool(self._source(normalize_address(address))["verified"])

    def get_name_tag(self, address: str) -> str | None:
        addr = normalize_address(address)

        def live() -> str | None:
            result = self._scanner("getaddresstag", address=addr)
            if isinstance(result, list):
                result = result[0] if result else None
            if isinstance(result, dict):
                result = result.get("nameTag")
            return result or None

        return self._fetch("scanner.getaddresstag", [addr], live)

    def get_symbol(self, address: str) -> str | None:
        return decode_text_result(self.call(address, SYMBOL_SELECTOR))

    def get_decimals(self, address: str) -> int | None:
        raw = self.call(address, DECIMALS_SELECTOR)
        if not raw or len(raw) < 32:
            return None
        value = int.from_bytes(raw[:32], "big")
        return value if value <= 255 else None

    def get_abi(self, address: str) -> ContractMetadata:
        addr = normalize_address(address)
        src = self._source(addr)
        abi = None
        if src["verified"] and src["abi"]:
            abi = tuple(abi_entry_signature(e) for e in src["abi"] if e.get("type") == "function")
        tag = self.get_name_tag(addr)
        symbol = self.get_symbol(addr) if tag is None else None
        return ContractMetadata(addr, bool(src["verified"]), abi, tag, symbol, src["contractName"])

    # ------------------------------------------------------------ signatures

    def lookup_signature(self, selector: bytes | str) -> list[str]:
        sel = "0x" + to_bytes(selector).hex()

        def live() -> list[str]:
            resp = self.transport.get_json(self._endpoint("signature_db_endpoint"), {"hex_signature": sel})
            return [r["text_signature"] for r in resp.get("results", [])]

        return list(self._fetch("sigdb.lookup", [sel], live))
