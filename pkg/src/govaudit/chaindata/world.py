"""In-process endpoints serving a JSON "world" description.

A world file describes accounts (code, storage, creation info, scanner
metadata, canned ``eth_call`` answers), transaction traces and signature-DB
entries.  :class:`WorldTransport` answers the same request shapes the live
endpoints receive, so recording against a world produces ordinary replay
caches::

    {
      "chainId": 1,
      "accounts": {
        "0xabc...": {
          "code": "0x6080...", "storage": {"0x0": "0x...32 bytes"},
          "creation": {"creator": "0x...", "txHash": "0x...", "creationKind": "CREATE2"},
          "verified": true, "abi": [...], "contractName": "Token",
          "nameTag": "Timelock", "symbol": "ARENA", "decimals": 18,
          "calls": {"0x<calldata>": "0x<return data>"}
        }
      },
      "traces": {"0x<txHash>": ["PUSH1", "CREATE2"]},
      "tracing": true,
      "signatures": {"0xa9059cbb": ["transfer(address,uint256)"]}
    }
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from govaudit.abi import encode_values, parse_type
from govaudit.chaindata.config import ProviderConfig
from govaudit.chaindata.provider import (
    DECIMALS_SELECTOR,
    SYMBOL_SELECTOR,
    ChainData,
    normalize_address,
)

RPC_URL = "world:rpc"
SCANNER_URL = "world:scanner"
SIGDB_URL = "world:sigdb"


def load_world(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


class WorldTransport:
    def __init__(self, world: dict):
        self.world = world
        self.accounts = {normalize_address(a): v for a, v in world.get("accounts", {}).items()}
        self.requests: list[tuple[str, Any]] = []
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()

    def _enter(self, url: str, body: Any) -> None:
        with self._lock:
            self.requests.append((url, body))
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)

    def _leave(self) -> None:
        with self._lock:
            self.in_flight -= 1

    def post_json(self, url: str, payload: dict) -> Any:
        self._enter(url, payload)
        try:
            if url != RPC_URL:
                raise ValueError(f"unknown endpoint {url}")
            return {"jsonrpc": "2.0", "id": payload.get("id"), **self._rpc(payload["method"], payload["params"])}
        finally:
            self._leave()

    def get_json(self, url: str, params: dict) -> Any:
        self._enter(url, params)
        try:
            if url == SCANNER_URL:
                return self._scanner(params)
            if url == SIGDB_URL:
                sel = params["hex_signature"].lower()
                names = self.world.get("signatures", {}).get(sel, [])
                return {"count": len(names), "results": [{"id": i, "text_signature": s} for i, s in enumerate(names)]}
            raise ValueError(f"unknown endpoint {url}")
        finally:
            self._leave()

    def _account(self, address: str) -> dict:
        return self.accounts.get(normalize_address(address), {})

    def _rpc(self, method: str, params: list) -> dict:
        if method == "eth_getCode":
            return {"result": self._account(params[0]).get("code", "0x")}
        if method == "eth_getStorageAt":
            storage = self._account(params[0]).get("storage", {})
            slot = int(params[1], 16)
            value = next((v for k, v in storage.items() if int(k, 16) == slot), "0x" + "00" * 32)
            return {"result": value}
        if method == "eth_call":
            call = params[0]
            acct = self._account(call["to"])
            data = bytes.fromhex(call["data"][2:])
            calls = {k.lower(): v for k, v in acct.get("calls", {}).items()}
            if call["data"].lower() in calls:
                return {"result": calls[call["data"].lower()]}
            if data == SYMBOL_SELECTOR and "symbol" in acct:
                return {"result": "0x" + encode_values([parse_type("string")], [acct["symbol"]]).hex()}
            if data == DECIMALS_SELECTOR and "decimals" in acct:
                return {"result": "0x" + int(acct["decimals"]).to_bytes(32, "big").hex()}
            return {"error": {"code": 3, "message": "execution reverted"}}
        if method == "debug_traceTransaction":
            if not self.world.get("tracing", True):
                return {"error": {"code": -32601, "message": "the method debug_traceTransaction does not exist"}}
            ops = self.world.get("traces", {}).get(params[0])
            if ops is None:
                return {"error": {"code": -32000, "message": f"transaction {params[0]} not found"}}
            return {"result": {"structLogs": [{"op": op} for op in ops]}}
        return {"error": {"code": -32601, "message": f"the method {method} does not exist"}}

    def _scanner(self, params: dict) -> dict:
        action = params.get("action")
        if action == "getcontractcreation":
            acct = self._account(params["contractaddresses"])
            creation = acct.get("creation")
            if not creation:
                return {"status": "0", "message": "No data found", "result": None}
            row = {
                "contractAddress": normalize_address(params["contractaddresses"]),
                "contractCreator": creation["creator"],
                "txHash": creation["txHash"],
            }
            if creation.get("creationKind"):
                row["creationKind"] = creation["creationKind"]
            return {"status": "1", "message": "OK", "result": [row]}
        if action == "getsourcecode":
            acct = self._account(params["address"])
            if acct.get("verified"):
                row = {
                    "SourceCode": acct.get("source", "// verified"),
                    "ABI": json.dumps(acct.get("abi", [])),
                    "ContractName": acct.get("contractName", ""),
                }
            else:
                row = {"SourceCode": "", "ABI": "Contract source code not verified", "ContractName": ""}
            return {"status": "1", "message": "OK", "result": [row]}
        if action == "getaddresstag":
            tag = self._account(params["address"]).get("nameTag")
            return {"status": "1", "message": "OK", "result": {"nameTag": tag or ""}}
        return {"status": "0", "message": "NOTOK", "result": f"unknown action {action}"}


def world_config(mode: str = "live", cache_dir: str | Path | None = None, chain_id: int = 1, **kw) -> ProviderConfig:
    return ProviderConfig(
        rpc_endpoint=RPC_URL,
        scanner_endpoint=SCANNER_URL,
        signature_db_endpoint=SIGDB_URL,
        mode=mode,
        cache_dir=Path(cache_dir) if cache_dir is not None else None,
        chain_id=chain_id,
        **kw,
    )


def world_provider(world: dict, mode: str = "live", cache_dir: str | Path | None = None, **kw) -> ChainData:
    config = world_config(mode, cache_dir, chain_id=world.get("chainId", 1), **kw)
    return ChainData(config, None if mode == "replay" else WorldTransport(world))
