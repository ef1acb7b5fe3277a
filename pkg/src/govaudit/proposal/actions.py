"""Turn proposal calls into code actions and check their targets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from govaudit.abi import DecodeError, TypedParam, decode_calldata
from govaudit.chaindata.errors import ChainDataError
from govaudit.chaindata.provider import ContractMetadata, CreationRecord
from govaudit.evm.hashing import compute_selector
from govaudit.governance.chain import (
    CreationChain,
    MutabilityVerdict,
    assess_mutability,
    build_creation_chain,
)
from govaudit.proposal.model import ProposalCall, ProposalRecord

SKIP_GOVERNANCE = "governance-contract"
SKIP_EOA = "externally-owned-account"


class ActionProvider(Protocol):
    def get_abi(self, address: str) -> ContractMetadata: ...
    def lookup_signature(self, selector: bytes) -> list[str]: ...


class TargetProvider(Protocol):
    def is_verified(self, address: str) -> bool: ...
    def get_code(self, address: str) -> bytes: ...
    def get_creation(self, address: str) -> CreationRecord | None: ...


@dataclass(frozen=True)
class CodeAction:
    target_address: str
    value: int
    function_signature: bytes | None
    target_address_symbol: str | None = None
    function_name: str | None = None
    function_parameters: tuple[TypedParam, ...] | None = None
    name_source: str | None = None  # "proposal" | "abi" | "signatureDb"
    candidates: tuple[str, ...] = ()
    diagnostics: tuple[str, ...] = ()
    incomplete: bool = False  # a provider error left fields empty

    @property
    def short_name(self) -> str | None:
        return self.function_name.split("(", 1)[0] if self.function_name else None

    def to_dict(self) -> dict:
        return {
            "targetAddress": self.target_address,
            "targetAddressSymbol": self.target_address_symbol,
            "value": str(self.value),
            "functionSignature": "0x" + self.function_signature.hex() if self.function_signature else None,
            "functionName": self.function_name,
            "functionParameters": (
                None if self.function_parameters is None else [p.to_dict() for p in self.function_parameters]
            ),
            "nameSource": self.name_source,
            "candidates": list(self.candidates),
            "diagnostics": list(self.diagnostics),
            "incomplete": self.incomplete,
        }


def _try_decode(signature: str, calldata: bytes) -> tuple[TypedParam, ...] | None:
    try:
        return tuple(decode_calldata(signature, calldata))
    except (DecodeError, ValueError):
        return None


def _pick_candidate(candidates: list[str], calldata: bytes) -> tuple[str | None, tuple[TypedParam, ...] | None]:
    """First candidate that decodes; among decodable ones, the fewest parameters."""
    decoded = []
    for order, sig in enumerate(candidates):
        params = _try_decode(sig, calldata)
        if params is not None:
            decoded.append((len(params), order, sig, params))
    if not decoded:
        return None, None
    _, _, sig, params = min(decoded)
    return sig, params


def extract_code_action(call: ProposalCall, provider: ActionProvider) -> CodeAction:
    diagnostics: list[str] = []
    incomplete = False
    selector = call.selector
    symbol = None
    abi: tuple[str, ...] | None = None
    try:
        meta = provider.get_abi(call.target)
        symbol = meta.name_tag or meta.symbol
        abi = meta.abi
    except ChainDataError as exc:
        diagnostics.append(f"metadata unavailable: {exc}")
        incomplete = True

    name = source = None
    params = None
    candidates: tuple[str, ...] = ()
    if selector is None:
        diagnostics.append("no function selector (plain value transfer)")
    elif call.signature_text is not None:
        name, source = call.signature_text, "proposal"
    elif abi:
        for sig in abi:
            if compute_selector(sig) == selector:
                name, source = sig, "abi"
                break
    if selector is not None and name is None:
        try:
            candidates = tuple(provider.lookup_signature(selector))
        except ChainDataError as exc:
            diagnostics.append(f"signature lookup failed: {exc}")
            incomplete = True
        if candidates:
            name, params = _pick_candidate(list(candidates), call.calldata)
            if name is None:
                diagnostics.append("no signature candidate decodes the calldata")
            else:
                source = "signatureDb"
    if name is not None and params is None:
        try:
            params = tuple(decode_calldata(name, call.calldata))
        except (DecodeError, ValueError) as exc:
            diagnostics.append(f"calldata does not decode as {name}: {exc}")
    return CodeAction(
        target_address=call.target,
        value=call.value,
        function_signature=selector,
        target_address_symbol=symbol,
        function_name=name,
        function_parameters=params,
        name_source=source,
        candidates=candidates,
        diagnostics=tuple(diagnostics),
        incomplete=incomplete,
    )


def extract_code_actions(proposal: ProposalRecord, provider: ActionProvider) -> list[CodeAction]:
    return [extract_code_action(call, provider) for call in proposal.calls]


@dataclass(frozen=True)
class TargetImmutabilityResult:
    target: str
    open_source: bool | None = None
    create2_risk: MutabilityVerdict | None = None
    chain: CreationChain | None = None
    skipped: str | None = None
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def mutable(self) -> bool:
        return bool(self.create2_risk and self.create2_risk.mutable)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "openSource": self.open_source,
            "create2Risk": self.create2_risk.to_dict() if self.create2_risk else None,
            "chain": self.chain.to_dict() if self.chain else None,
            "skipped": self.skipped,
            "diagnostics": list(self.diagnostics),
        }


def check_target_immutability(
    call: ProposalCall,
    provider: TargetProvider,
    governance: str | None = None,
) -> TargetImmutabilityResult:
    """Open-source status and CREATE2 mutability of a call target.

    The governance contract itself is skipped (it is audited on its own) and
    so are plain accounts, which hold no code to replace.
    """
    target = call.target
    if governance is not None and target == governance:
        return TargetImmutabilityResult(target, skipped=SKIP_GOVERNANCE)
    if provider.get_creation(target) is None and not provider.get_code(target):
        return TargetImmutabilityResult(target, skipped=SKIP_EOA)
    open_source = provider.is_verified(target)
    chain = build_creation_chain(target, provider)
    verdict = assess_mutability(chain, provider)
    return TargetImmutabilityResult(target, open_source, verdict, chain)

