"""Compare what a proposal says with what its code does."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Callable, Protocol, Sequence

from govaudit.abi import TypedParam, parse_type
from govaudit.chaindata.errors import ChainDataError
from govaudit.proposal.actions import (
    CodeAction,
    TargetImmutabilityResult,
    check_target_immutability,
    extract_code_actions,
)
from govaudit.proposal.model import ProposalRecord
from govaudit.proposal.text import (
    DescriptionIntention,
    Lexicon,
    ParseProvider,
    SentenceClassifier,
    default_lexicon,
    description_intentions,
    tokenize,
)

LACK_OF_DESCRIPTION_INTENTION = "LackOfDescriptionIntention"
LACK_OF_CODE_ACTION = "LackOfCodeAction"
INCOMPLETE_FUNCTION = "IncompleteFunction"
INCOMPLETE_PARAMETER = "IncompleteParameter"
INCORRECT_PROPOSAL = "IncorrectProposal"
CATEGORIES = (
    LACK_OF_DESCRIPTION_INTENTION,
    LACK_OF_CODE_ACTION,
    INCOMPLETE_FUNCTION,
    INCOMPLETE_PARAMETER,
    INCORRECT_PROPOSAL,
)
CODE_MUTABILITY = "CodeMutability"
NORMAL = "Normal"
EXCLUDED = "Excluded"
# one label per proposal, most severe first
INCIDENT_PRIORITY = (
    CODE_MUTABILITY,
    LACK_OF_DESCRIPTION_INTENTION,
    LACK_OF_CODE_ACTION,
    INCORRECT_PROPOSAL,
    INCOMPLETE_FUNCTION,
    INCOMPLETE_PARAMETER,
)

MENTIONED = "Mentioned"
SKIPPED = "Skipped"
DEFAULT_FUNCTION_THRESHOLD = 0.75

Similarity = Callable[[str, str], float]

_STOPWORDS = {
    "the", "a", "an", "of", "to", "for", "in", "on", "at", "by", "with", "and", "or",
    "from", "into", "this", "that", "is", "be", "it", "as", "we", "our",
}


class ParameterProvider(Protocol):
    def get_name_tag(self, address: str) -> str | None: ...
    def get_symbol(self, address: str) -> str | None: ...
    def get_decimals(self, address: str) -> int | None: ...


# ------------------------------------------------------------------ lexical similarity


def identifier_words(text: str) -> list[str]:
    """Lowercased words with camelCase, snake_case and digits split apart."""
    text = re.sub(r"([a-z0-9])([A-Z])", r"\1 \2", text)
    text = re.sub(r"([A-Z]+)([A-Z][a-z])", r"\1 \2", text)
    return [w.lower() for w in re.split(r"[^A-Za-z0-9]+", text) if w]


def _singular(word: str) -> str:
    if len(word) > 3 and word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def normalized_words(text: str, lexicon: Lexicon | None = None) -> set[str]:
    lexicon = lexicon or default_lexicon()
    out = set()
    for w in identifier_words(text):
        if w in _STOPWORDS:
            continue
        base = lexicon.lemma(w) or _singular(w)
        out.add(lexicon.canon(base))
    return out


def lexical_similarity(code_text: str, intention_text: str) -> float:
    """Share of the code-side words that the intention also uses, in [0, 1].

    Words are compared after identifier splitting, case folding, inflection
    stripping and synonym canonicalisation.
    """
    code = normalized_words(code_text)
    if not code:
        return 0.0
    return len(code & normalized_words(intention_text)) / len(code)


# ------------------------------------------------------------------ matching


@dataclass(frozen=True)
class FunctionMatch:
    status: str  # Mentioned | IncompleteFunction
    score: float
    intention: int | None = None  # index of the best-scoring intention
    negative_mention: bool = False

    @property
    def mentioned(self) -> bool:
        return self.status == MENTIONED

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "score": round(self.score, 6),
            "intention": self.intention,
            "negativeMention": self.negative_mention,
        }


def function_texts(action: CodeAction) -> list[str]:
    """Texts that describe what a code action does.

    A call without a selector that moves value reads as a transfer.
    """
    name = action.short_name
    if name is None and action.function_signature is None and action.value > 0:
        name = "transfer"
    symbol = action.target_address_symbol
    if name and symbol:
        return [name, f"{name} {symbol}"]
    return [t for t in (name, symbol) if t]


def match_function(
    action: CodeAction,
    intentions: Sequence[DescriptionIntention],
    similarity: Similarity = lexical_similarity,
    threshold: float = DEFAULT_FUNCTION_THRESHOLD,
) -> FunctionMatch:
    texts = function_texts(action)
    best, best_i, negative = 0.0, None, False
    for i, intention in enumerate(intentions):
        score = max((similarity(t, intention.text()) for t in texts), default=0.0)
        if score >= threshold and intention.negative:
            negative = True
        if best_i is None or score > best:
            best, best_i = score, i
    status = MENTIONED if best >= threshold and texts else INCOMPLETE_FUNCTION
    return FunctionMatch(status, best, best_i, negative and status == MENTIONED)


def _parse_number(text: str) -> Decimal | None:
    t = text.replace(",", "").replace("_", "").rstrip("%")
    scale = Decimal(1)
    if t and t[-1] in "kKmMbB":
        scale = Decimal(10) ** {"k": 3, "m": 6, "b": 9}[t[-1].lower()]
        t = t[:-1]
    try:
        return Decimal(t) * scale
    except InvalidOperation:
        return None


@dataclass
class _Mentions:
    """Everything the intentions mention, in comparable forms."""

    words: set[str] = field(default_factory=set)
    numbers: set[Decimal] = field(default_factory=set)
    hexes: list[str] = field(default_factory=list)

    @classmethod
    def of(cls, intentions: Sequence[DescriptionIntention]) -> _Mentions:
        m = cls()
        for intention in intentions:
            for token in intention.words():
                for kind, text in tokenize(token) or [("word", token)]:
                    if kind == "address":
                        m.hexes.append(text.lower())
                    elif kind == "number":
                        n = _parse_number(text)
                        if n is not None:
                            m.numbers.add(n.normalize())
                    elif kind in ("word", "func"):
                        m.words.update(identifier_words(text))
        return m

    def has_words(self, text: str) -> bool:
        words = [w for w in identifier_words(text) if w not in _STOPWORDS]
        return bool(words) and all(w in self.words for w in words)

    def has_hex(self, raw_hex: str) -> bool:
        raw_hex = raw_hex.lower()
        for h in self.hexes:
            body = h[2:]
            if "…" in body or "..." in body:
                prefix, _, suffix = body.replace("...", "…").partition("…")
                if len(prefix) + len(suffix) >= 6 and raw_hex[2:].startswith(prefix) and raw_hex.endswith(suffix):
                    return True
            elif body == raw_hex[2:]:
                return True
        return False


@dataclass(frozen=True)
class ParameterMatch:
    status: str  # Mentioned | IncompleteParameter | Skipped
    solidity_type: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"status": self.status, "type": self.solidity_type, "detail": self.detail}


def _address_name(address: str, provider: ParameterProvider | None) -> str | None:
    if provider is None:
        return None
    try:
        return provider.get_name_tag(address) or provider.get_symbol(address)
    except ChainDataError:
        return None


def _match_value(
    typ,
    value,
    mentions: _Mentions,
    provider: ParameterProvider | None,
    decimals: int | None,
) -> tuple[str, str]:
    if typ.base == "array":
        results = [_match_value(typ.element, v, mentions, provider, decimals) for v in value]
        missing = [i for i, (s, _) in enumerate(results) if s == INCOMPLETE_PARAMETER]
        if any(s == SKIPPED for s, _ in results) and not missing:
            return SKIPPED, "element type not checked"
        if missing:
            return INCOMPLETE_PARAMETER, f"elements {missing} not mentioned"
        return MENTIONED, "all elements mentioned"
    if typ.base == "address":
        name = _address_name(value, provider)
        if name and mentions.has_words(name):
            return MENTIONED, f"name {name!r}"
        if mentions.has_hex(value):
            return MENTIONED, "hex address"
        return INCOMPLETE_PARAMETER, f"neither {name!r} nor the address is mentioned" if name else "address not mentioned"
    if typ.base in ("uint", "int"):
        raw = Decimal(value)
        if raw.normalize() in mentions.numbers:
            return MENTIONED, "raw value"
        if decimals is not None:
            scaled = (raw / (Decimal(10) ** decimals)).normalize()
            if scaled in mentions.numbers:
                return MENTIONED, f"value scaled by 10^{decimals}"
        return INCOMPLETE_PARAMETER, f"{value} not mentioned"
    if typ.base in ("bytes", "fixedbytes"):
        raw = bytes(value)
        if not raw.strip(b"\0"):
            return MENTIONED, "empty"
        if mentions.has_hex("0x" + raw.hex()) or mentions.has_hex("0x" + raw.rstrip(b"\0").hex()):
            return MENTIONED, "hex bytes"
        try:
            text = raw.rstrip(b"\0").decode("utf-8")
        except UnicodeDecodeError:
            text = ""
        if text and text.isprintable() and mentions.has_words(text):
            return MENTIONED, "decoded text"
        return INCOMPLETE_PARAMETER, "bytes not mentioned"
    return SKIPPED, f"{typ} not checked"


def match_parameter(
    param: TypedParam,
    intentions: Sequence[DescriptionIntention],
    provider: ParameterProvider | None = None,
    decimals: int | None = None,
) -> ParameterMatch:
    """Is ``param`` mentioned by any intention?

    Addresses match by resolved name, else by hex (full or abbreviated as
    ``0x1234…abcd``); numbers by raw value or, with ``decimals`` (ERC-20
    targets), by the human-scale value; bytes by hex or UTF-8 text; arrays
    need every element mentioned.  Other types are skipped.
    """
    typ = parse_type(param.solidity_type)
    status, detail = _match_value(typ, param.value, _Mentions.of(intentions), provider, decimals)
    return ParameterMatch(status, param.solidity_type, detail)


# ------------------------------------------------------------------ detection


@dataclass(frozen=True)
class InconsistencyFinding:
    category: str
    subject: dict
    explanation: str

    def to_dict(self) -> dict:
        return {"category": self.category, "subject": self.subject, "explanation": self.explanation}


@dataclass(frozen=True)
class Matchers:
    similarity: Similarity = lexical_similarity
    threshold: float = DEFAULT_FUNCTION_THRESHOLD
    provider: ParameterProvider | None = None


@dataclass(frozen=True)
class ConsistencyReport:
    proposal_id: str
    findings: tuple[InconsistencyFinding, ...]
    intentions: tuple[DescriptionIntention, ...]
    code_actions: tuple[CodeAction, ...]
    function_matches: tuple[FunctionMatch | None, ...] = ()
    parameter_matches: tuple[tuple[ParameterMatch, ...], ...] = ()
    excluded: bool = False

    @property
    def normal(self) -> bool:
        return not self.excluded and not self.findings

    @property
    def categories(self) -> set[str]:
        return {f.category for f in self.findings}

    def to_dict(self) -> dict:
        return {
            "proposalId": self.proposal_id,
            "excluded": self.excluded,
            "normal": self.normal,
            "findings": [f.to_dict() for f in self.findings],
            "intentions": [i.to_dict() for i in self.intentions],
            "codeActions": [a.to_dict() for a in self.code_actions],
            "functionMatches": [m.to_dict() if m else None for m in self.function_matches],
            "parameterMatches": [[p.to_dict() for p in ps] for ps in self.parameter_matches],
        }


def _decimals(action: CodeAction, provider: ParameterProvider | None, cache: dict) -> int | None:
    if provider is None:
        return None
    addr = action.target_address
    if addr not in cache:
        try:
            cache[addr] = provider.get_decimals(addr)
        except ChainDataError:
            cache[addr] = None
    return cache[addr]


def detect_inconsistencies(
    proposal: ProposalRecord,
    intentions: Sequence[DescriptionIntention],
    code_actions: Sequence[CodeAction],
    matchers: Matchers | None = None,
) -> ConsistencyReport:
    matchers = matchers or Matchers()
    intentions = tuple(intentions)
    code_actions = tuple(code_actions)
    if not proposal.description_supported:
        return ConsistencyReport(proposal.id, (), intentions, code_actions, excluded=True)

    findings: list[InconsistencyFinding] = []
    if code_actions and not intentions:
        findings.append(InconsistencyFinding(
            LACK_OF_DESCRIPTION_INTENTION,
            {"proposal": proposal.id, "codeActions": len(code_actions)},
            "the code performs calls but the description states no intention",
        ))
        return ConsistencyReport(proposal.id, tuple(findings), intentions, code_actions)
    if intentions and not code_actions:
        findings.append(InconsistencyFinding(
            LACK_OF_CODE_ACTION,
            {"proposal": proposal.id, "intentions": len(intentions)},
            "the description states intentions but the proposal has no code",
        ))
        return ConsistencyReport(proposal.id, tuple(findings), intentions, code_actions)

    fmatches: list[FunctionMatch] = []
    pmatches: list[tuple[ParameterMatch, ...]] = []
    decimals_cache: dict = {}
    for i, action in enumerate(code_actions):
        fm = match_function(action, intentions, matchers.similarity, matchers.threshold)
        fmatches.append(fm)
        label = action.function_name or (action.function_signature.hex() if action.function_signature else "value transfer")
        if fm.negative_mention:
            findings.append(InconsistencyFinding(
                INCORRECT_PROPOSAL,
                {"action": i, "function": label},
                "the description says this call should not happen",
            ))
        elif not fm.mentioned:
            findings.append(InconsistencyFinding(
                INCOMPLETE_FUNCTION,
                {"action": i, "function": label, "score": round(fm.score, 6)},
                "no intention describes this call",
            ))
        row = []
        decimals = _decimals(action, matchers.provider, decimals_cache) if action.function_parameters else None
        for j, param in enumerate(action.function_parameters or ()):
            pm = match_parameter(param, intentions, matchers.provider, decimals)
            row.append(pm)
            if pm.status == INCOMPLETE_PARAMETER:
                findings.append(InconsistencyFinding(
                    INCOMPLETE_PARAMETER,
                    {"action": i, "function": label, "parameter": j, "type": param.solidity_type},
                    pm.detail,
                ))
        pmatches.append(tuple(row))
    return ConsistencyReport(
        proposal.id, tuple(findings), intentions, code_actions, tuple(fmatches), tuple(pmatches)
    )


# ------------------------------------------------------------------ whole-proposal audit


@dataclass(frozen=True)
class ProposalAudit:
    proposal: ProposalRecord
    consistency: ConsistencyReport
    targets: tuple[TargetImmutabilityResult, ...]
    classification: str
    incomplete: bool = False

    def to_dict(self) -> dict:
        return {
            "proposalId": self.proposal.id,
            "classification": self.classification,
            "incomplete": self.incomplete,
            "consistency": self.consistency.to_dict(),
            "targets": [t.to_dict() for t in self.targets],
        }


def classify_incident(report: ConsistencyReport, targets: Sequence[TargetImmutabilityResult] = ()) -> str:
    """Single most severe label for a proposal."""
    found = set(report.categories)
    if any(t.mutable for t in targets):
        found.add(CODE_MUTABILITY)
    for category in INCIDENT_PRIORITY:
        if category in found:
            return category
    return EXCLUDED if report.excluded else NORMAL


def _classifier_symbols(actions: Sequence[CodeAction]) -> list[str]:
    out = []
    for a in actions:
        if a.target_address_symbol:
            out.extend(identifier_words(a.target_address_symbol))
        if a.short_name:
            out.append(a.short_name)
    return out


def audit_proposal(
    proposal: ProposalRecord,
    provider,
    classifier: SentenceClassifier | None = None,
    parse_provider: ParseProvider | None = None,
    matchers: Matchers | None = None,
) -> ProposalAudit:
    """Extraction, consistency checks and target immutability for one proposal."""
    actions = extract_code_actions(proposal, provider)
    intentions = description_intentions(
        proposal.description, classifier, parse_provider, _classifier_symbols(actions)
    )
    matchers = matchers or Matchers(provider=provider)
    report = detect_inconsistencies(proposal, intentions, actions, matchers)
    targets = []
    incomplete = any(a.incomplete for a in actions)
    for call in proposal.calls:
        try:
            targets.append(check_target_immutability(call, provider, proposal.governance))
        except ChainDataError as exc:
            targets.append(TargetImmutabilityResult(call.target, diagnostics=(str(exc),)))
            incomplete = True
    return ProposalAudit(proposal, report, tuple(targets), classify_incident(report, targets), incomplete)
