"""Does a governance contract come from a known, complete implementation?"""

from __future__ import annotations

import json
from collections.abc import Collection, Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from govaudit.chaindata.provider import CreationRecord, normalize_address
from govaudit.evm import build_cfg, disassemble, extract_functions
from govaudit.similarity import (
    DEFAULT_THRESHOLD,
    Template,
    code_profile,
    function_similar,
    jaccard,
    template_variants,
)

CREATOR = "creatorMatchesPlatformDeployer"
BYTECODE = "bytecodeMatchesTemplate"
FUNCTIONS = "hasProposeVoteExecute"
OPEN_SOURCE = "documentedOpenSource"

ROLES = ("propose", "vote", "execute")


class SoundnessProvider(Protocol):
    def get_code(self, address: str) -> bytes: ...
    def get_creation(self, address: str) -> CreationRecord | None: ...
    def is_verified(self, address: str) -> bool: ...


@dataclass(frozen=True)
class SoundnessVerdict:
    sound: bool
    evidence: str | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"sound": self.sound, "evidence": self.evidence, "details": self.details}


def load_platform_deployers(path: str | Path, chain_id: int | None = None) -> dict[str, str]:
    """Deployer address -> platform name, optionally filtered to one chain."""
    data = json.loads(Path(path).read_text())
    out = {}
    for entry in data["platforms"]:
        if chain_id is not None and entry.get("chainId", chain_id) != chain_id:
            continue
        for addr in entry["deployers"]:
            out[normalize_address(addr)] = entry["platform"]
    return out


def check_soundness(
    governance_address: str,
    provider: SoundnessProvider,
    templates: Iterable[Template],
    platform_deployers: Collection[str],
    documented_open_source: Collection[str] = (),
    threshold: float = DEFAULT_THRESHOLD,
) -> SoundnessVerdict:
    """Try the four evidence paths in order and stop at the first that holds.

    Provider errors propagate; they are not a negative verdict.
    """
    addr = normalize_address(governance_address)
    templates = list(templates)
    deployers = {normalize_address(a) for a in platform_deployers}
    details: dict = {}

    record = provider.get_creation(addr)
    details["creator"] = record.creator if record else None
    if record is not None and normalize_address(record.creator) in deployers:
        return SoundnessVerdict(True, CREATOR, details)

    code = provider.get_code(addr)
    profile = code_profile(code)
    best_score, best_name = 0.0, None
    for t in templates:
        if t.kind != "platform":
            continue
        score = jaccard(profile, code_profile(t.runtime_bytecode))
        if score > best_score or best_name is None:
            best_score, best_name = score, t.name
    details["bytecodeScore"] = best_score
    details["bytecodeTemplate"] = best_name
    if best_name is not None and best_score >= threshold:
        return SoundnessVerdict(True, BYTECODE, details)

    functions = list(extract_functions(build_cfg(disassemble(code))))
    role_scores = {}
    for role in ROLES:
        variants = template_variants(templates, role)
        if not variants or not functions:
            role_scores[role] = 0.0
            continue
        role_scores[role] = max(function_similar(fn, variants, threshold).score for fn in functions)
    details["functionScores"] = role_scores
    if all(score >= threshold for score in role_scores.values()):
        return SoundnessVerdict(True, FUNCTIONS, details)

    documented = addr in {normalize_address(a) for a in documented_open_source}
    verified = provider.is_verified(addr) if documented else False
    details["documented"] = documented
    details["verified"] = verified
    if documented and verified:
        return SoundnessVerdict(True, OPEN_SOURCE, details)
    return SoundnessVerdict(False, None, details)
