"""Proposal records and their on-disk format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from govaudit.abi import canonical_signature, parse_signature
from govaudit.chaindata.provider import normalize_address
from govaudit.evm.disasm import to_bytes
from govaudit.evm.hashing import compute_selector


class ProposalFormatError(ValueError):
    """A proposal file or record is malformed."""


@dataclass(frozen=True)
class ProposalCall:
    target: str
    value: int = 0
    signature: bytes | None = None  # 4-byte selector
    calldata: bytes = b""
    signature_text: str | None = None  # canonical text when the proposal carries it

    @property
    def selector(self) -> bytes | None:
        if self.signature is not None:
            return self.signature
        return self.calldata[:4] if len(self.calldata) >= 4 else None

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "value": str(self.value),
            "signature": self.signature_text or ("0x" + self.signature.hex() if self.signature else None),
            "calldata": "0x" + self.calldata.hex(),
        }


@dataclass(frozen=True)
class ProposalRecord:
    id: str
    description: str
    calls: tuple[ProposalCall, ...] = ()
    governance: str | None = None
    # platforms whose proposals carry no description are left out of consistency scoring
    description_supported: bool = True
    meta: dict = field(default_factory=dict)


def parse_call(raw: dict) -> ProposalCall:
    """Build a call from ``{target, value, signature, calldata}``.

    ``signature`` may be a 4-byte hex selector or canonical text such as
    ``"transfer(address,uint256)"``.  Text signatures follow the Governor
    Bravo convention where calldata holds only the encoded arguments; the
    selector is prepended when it is not already there.
    """
    try:
        target = normalize_address(raw["target"])
    except (KeyError, ValueError) as exc:
        raise ProposalFormatError(f"bad call target: {exc}") from exc
    value = raw.get("value", 0)
    try:
        value = int(value, 0) if isinstance(value, str) else int(value)
        calldata = to_bytes(raw.get("calldata") or "")
    except ValueError as exc:
        raise ProposalFormatError(f"bad call field: {exc}") from exc
    sig = raw.get("signature")
    if not sig:
        return ProposalCall(target, value, None, calldata)
    if "(" in sig:
        try:
            text = canonical_signature(*parse_signature(sig))
        except ValueError as exc:
            raise ProposalFormatError(f"bad signature {sig!r}: {exc}") from exc
        selector = compute_selector(text)
        if calldata[:4] != selector:
            calldata = selector + calldata
        return ProposalCall(target, value, selector, calldata, text)
    try:
        selector = to_bytes(sig)
    except ValueError as exc:
        raise ProposalFormatError(f"bad signature {sig!r}") from exc
    if len(selector) != 4:
        raise ProposalFormatError(f"selector must be 4 bytes: {sig!r}")
    if calldata and calldata[:4] != selector:
        raise ProposalFormatError(f"calldata does not start with selector {sig}")
    return ProposalCall(target, value, selector, calldata or selector)


def parse_proposal(raw: dict) -> ProposalRecord:
    if not isinstance(raw, dict) or "id" not in raw:
        raise ProposalFormatError("proposal record needs an 'id'")
    description = raw.get("description") or ""
    if not isinstance(description, str):
        raise ProposalFormatError("description must be text")
    calls = raw.get("calls")
    calls = [] if calls is None else calls
    if not isinstance(calls, list):
        raise ProposalFormatError("calls must be a list")
    governance = raw.get("governance")
    return ProposalRecord(
        id=str(raw["id"]),
        description=description,
        calls=tuple(parse_call(c) for c in calls),
        governance=normalize_address(governance) if governance else None,
        description_supported=bool(raw.get("descriptionSupported", True)),
        meta=dict(raw.get("meta") or {}),
    )


def load_proposals(path: str | Path) -> list[ProposalRecord]:
    """Read a JSON object, a JSON array, or JSON lines of proposal records."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ProposalFormatError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
        records = data if isinstance(data, list) else [data]
    except json.JSONDecodeError:
        try:
            records = [json.loads(line) for line in text.splitlines() if line.strip()]
        except json.JSONDecodeError as exc:
            raise ProposalFormatError(f"{path}: {exc}") from exc
    return [parse_proposal(r) for r in records]
