"""Contract creation chains and CREATE2 mutability."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from govaudit.chaindata.errors import ChainDataError
from govaudit.chaindata.provider import CreationRecord, normalize_address
from govaudit.evm.disasm import Bytecode, disassemble

MAX_CHAIN_LENGTH = 64

SELFDESTRUCT_REASON = "selfdestruct"
DELEGATECALL_REASON = "delegatecall-proxy"
DESTROYED_REASON = "already-destroyed"

# weakest first; a verdict reports the weakest source it relied on
_CONFIDENCE_ORDER = ("assumed", "record", "trace")


class IntegrityError(ChainDataError):
    """The creator relation loops back on itself."""


class ChainProvider(Protocol):
    def get_code(self, address: str) -> bytes: ...
    def get_creation(self, address: str) -> CreationRecord | None: ...


@dataclass(frozen=True)
class CreationStep:
    created: str
    creator: str
    kind: str
    tx_id: str
    kind_source: str = "record"

    def to_dict(self) -> dict:
        return {
            "createdAddress": self.created,
            "creatorAddress": self.creator,
            "creationKind": self.kind,
            "creationTxId": self.tx_id,
            "kindSource": self.kind_source,
        }


@dataclass(frozen=True)
class CreationChain:
    steps: tuple[CreationStep, ...]
    terminal_eoa: str

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps], "terminalEOA": self.terminal_eoa}


@dataclass(frozen=True)
class MutabilityVerdict:
    mutable: bool
    pivot_index: int | None
    destructibility: tuple[bool, ...]
    reasons: tuple[tuple[str, ...], ...]
    confidence: str

    def to_dict(self) -> dict:
        return {
            "mutable": self.mutable,
            "pivotIndex": self.pivot_index,
            "destructibility": list(self.destructibility),
            "reasons": [list(r) for r in self.reasons],
            "confidence": self.confidence,
        }


def build_creation_chain(address: str, provider: ChainProvider) -> CreationChain:
    """Follow creator-of from ``address`` until an account with no code and no creation record.

    Contracts that have since self-destructed still have a creation record,
    so they stay in the chain.
    """
    current = normalize_address(address)
    record = provider.get_creation(current)
    if record is None:
        raise ChainDataError(f"no creation record for {current}")
    seen = {current}
    steps: list[CreationStep] = []
    while True:
        step = CreationStep(current, normalize_address(record.creator), record.kind, record.tx_id, record.kind_source)
        steps.append(step)
        if step.creator in seen:
            raise IntegrityError(f"creator cycle through {step.creator}")
        if len(steps) >= MAX_CHAIN_LENGTH:
            raise IntegrityError(f"creation chain longer than {MAX_CHAIN_LENGTH}")
        seen.add(step.creator)
        record = provider.get_creation(step.creator)
        if record is None:
            if provider.get_code(step.creator):
                raise ChainDataError(f"no creation record for contract {step.creator}")
            return CreationChain(tuple(steps), step.creator)
        current = step.creator


def self_destruct_reasons(runtime_bytecode: Bytecode) -> tuple[str, ...]:
    """Why the code can remove itself, scanning every instruction including dead code."""
    names = {ins.name for ins in disassemble(runtime_bytecode)}
    reasons = []
    if "SELFDESTRUCT" in names:
        reasons.append(SELFDESTRUCT_REASON)
    if "DELEGATECALL" in names:
        reasons.append(DELEGATECALL_REASON)
    return tuple(reasons)


def can_self_destruct(runtime_bytecode: Bytecode) -> bool:
    return bool(self_destruct_reasons(runtime_bytecode))


def assess_mutability(
    chain: CreationChain,
    provider: ChainProvider,
    include_pivot: bool = True,
) -> MutabilityVerdict:
    """Mutable iff some step was created by CREATE2 and every step up to it can be destroyed.

    With ``include_pivot`` false only the steps strictly before the CREATE2
    pivot need to be destructible.
    """
    reasons: list[tuple[str, ...]] = []
    for step in chain.steps:
        code = provider.get_code(step.created)
        reasons.append(self_destruct_reasons(code) if code else (DESTROYED_REASON,))
    destructible = tuple(bool(r) for r in reasons)

    pivot = None
    for i, step in enumerate(chain.steps):
        if step.kind != "CREATE2":
            continue
        prefix = destructible[: i + 1] if include_pivot else destructible[:i]
        if all(prefix):
            pivot = i
            break

    considered = chain.steps if pivot is None else chain.steps[: pivot + 1]
    sources = [s.kind_source for s in considered] or ["trace"]
    confidence = min(sources, key=lambda s: _CONFIDENCE_ORDER.index(s) if s in _CONFIDENCE_ORDER else 0)
    return MutabilityVerdict(pivot is not None, pivot, destructible, tuple(reasons), confidence)
