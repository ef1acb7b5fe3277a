"""Opcode n-gram profiles and Jaccard similarity.

Profiles are sets, not multisets: a repeated n-gram counts once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from govaudit.evm import (
    FunctionBody,
    build_cfg,
    disassemble,
    extract_functions,
    strip_push_arguments,
)
from govaudit.evm.disasm import Bytecode, to_bytes

DEFAULT_N = 5
DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True)
class NGramProfile:
    n: int
    grams: frozenset[tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.grams)


@dataclass(frozen=True)
class SimilarityDecision:
    score: float
    threshold: float

    @property
    def similar(self) -> bool:
        return self.score >= self.threshold

    def to_dict(self) -> dict:
        return {"score": self.score, "threshold": self.threshold, "similar": self.similar}


def ngram_profile(opcodes: Sequence[str], n: int = DEFAULT_N) -> NGramProfile:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ops = tuple(opcodes)
    return NGramProfile(n, frozenset(ops[i : i + n] for i in range(len(ops) - n + 1)))


def jaccard(a: NGramProfile, b: NGramProfile) -> float:
    if a.n != b.n:
        raise ValueError(f"profiles built with different n ({a.n} vs {b.n})")
    if not a.grams and not b.grams:
        return 1.0
    if not a.grams or not b.grams:
        return 0.0
    return len(a.grams & b.grams) / len(a.grams | b.grams)


def code_profile(code: Bytecode, n: int = DEFAULT_N) -> NGramProfile:
    return ngram_profile(strip_push_arguments(disassemble(code)), n)


def function_profile(body: FunctionBody, n: int = DEFAULT_N) -> NGramProfile:
    return ngram_profile(strip_push_arguments(body.instructions), n)


def contracts_similar(
    code_a: Bytecode, code_b: Bytecode, threshold: float = DEFAULT_THRESHOLD, n: int = DEFAULT_N
) -> SimilarityDecision:
    return SimilarityDecision(jaccard(code_profile(code_a, n), code_profile(code_b, n)), threshold)


def function_similar(
    target: FunctionBody,
    template_variants: Sequence[FunctionBody],
    threshold: float = DEFAULT_THRESHOLD,
    n: int = DEFAULT_N,
) -> SimilarityDecision:
    """Best match of ``target`` against any compiled variant of a template function."""
    if not template_variants:
        raise ValueError("function_similar needs at least one template variant")
    mine = function_profile(target, n)
    score = max(jaccard(mine, function_profile(v, n)) for v in template_variants)
    return SimilarityDecision(score, threshold)


@dataclass(frozen=True)
class Template:
    """One compiled template contract, as stored in a template fixture file."""

    name: str
    compiler_version: str
    runtime_bytecode: bytes
    # role or canonical signature -> 4-byte selector
    function_selectors: dict[str, bytes] = field(default_factory=dict)
    kind: str = "platform"
    platform: str | None = None
    chain_id: int | None = None

    @classmethod
    def from_record(cls, rec: dict) -> Template:
        return cls(
            name=rec["name"],
            compiler_version=rec["compilerVersion"],
            runtime_bytecode=to_bytes(rec["runtimeBytecodeHex"]),
            function_selectors={k: to_bytes(v) for k, v in rec.get("functionSelectors", {}).items()},
            kind=rec.get("kind", "platform"),
            platform=rec.get("platform"),
            chain_id=rec.get("chainId"),
        )

    def to_record(self) -> dict:
        rec = {
            "name": self.name,
            "compilerVersion": self.compiler_version,
            "runtimeBytecodeHex": "0x" + self.runtime_bytecode.hex(),
            "functionSelectors": {k: "0x" + v.hex() for k, v in self.function_selectors.items()},
            "kind": self.kind,
        }
        if self.platform is not None:
            rec["platform"] = self.platform
        if self.chain_id is not None:
            rec["chainId"] = self.chain_id
        return rec

    def function(self, role: str) -> FunctionBody | None:
        selector = self.function_selectors.get(role)
        if selector is None:
            return None
        return extract_functions(build_cfg(disassemble(self.runtime_bytecode))).by_selector(selector)


def load_templates(path: str | Path) -> list[Template]:
    """Read every ``*.jsonl`` template file under ``path`` (or the file itself)."""
    path = Path(path)
    files = sorted(path.glob("*.jsonl")) if path.is_dir() else [path]
    out = []
    for f in files:
        for line in f.read_text().splitlines():
            if line.strip():
                out.append(Template.from_record(json.loads(line)))
    return out


def template_variants(templates: Iterable[Template], role: str) -> list[FunctionBody]:
    """Function bodies playing ``role`` across all governor templates."""
    out = []
    for t in templates:
        if t.kind != "governor":
            continue
        body = t.function(role)
        if body is not None:
            out.append(body)
    return out
