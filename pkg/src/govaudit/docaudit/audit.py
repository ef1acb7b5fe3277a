"""Question-chain audit of governance documentation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Sequence

from govaudit.docaudit.chunking import (
    DEFAULT_OVERLAP,
    DEFAULT_SIZE,
    Chunk,
    Tokenizer,
    chunk_document,
    whitespace_tokens,
)
from govaudit.docaudit.llm import LlmClient, LlmError, complete_with_retry
from govaudit.docaudit.rules import DocumentationRule, QuestionChain, load_question_chain

QUESTION_PROMPT = (
    "You are reviewing the governance documentation of a DAO (decentralized autonomous "
    "organization). Answer the question using only the document below.\n"
    "Question: {question}\n"
    "Reply in exactly this format:\n"
    "Result: Yes/No\n"
    "Reason: <the statement in the document that supports your answer>\n"
    "Document:\n{document}"
)
VERIFY_PROMPT = (
    "Decide whether the document below states the content of a sentence.\n"
    "Sentence: {reason}\n"
    "Reply in exactly this format:\n"
    "Result: Yes/No\n"
    "Document:\n{document}"
)

_RESULT = re.compile(r"result\s*:\s*\**\s*(yes|no)\b", re.I)
_REASON = re.compile(r"reason\s*:\s*(.*)", re.I | re.S)

DEMOTED_UNVERIFIED = "verification-failed"
DEMOTED_EMPTY_REASON = "empty-reason"


class AuditIncomplete(Exception):
    """The LLM endpoint failed persistently; the audit could not finish."""

    def __init__(self, message: str, partial: DocRuleResult | None = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class LlmAnswer:
    verdict: str  # Yes | No
    reason: str
    raw: str
    attempts: int = 1
    parse_failed: bool = False

    @property
    def yes(self) -> bool:
        return self.verdict == "Yes"


def parse_answer(text: str) -> tuple[str, str] | None:
    m = _RESULT.search(text)
    if not m:
        return None
    verdict = "Yes" if m.group(1).lower() == "yes" else "No"
    r = _REASON.search(text, m.end())
    return verdict, (r.group(1).strip() if r else "")


def _query(prompt: str, client: LlmClient, max_attempts: int, backoff: float) -> LlmAnswer:
    raw = ""
    for attempt in range(1, max_attempts + 1):
        try:
            raw = complete_with_retry(client, prompt, backoff=backoff)
        except LlmError as exc:
            raise AuditIncomplete(f"LLM unavailable: {exc}") from exc
        parsed = parse_answer(raw)
        if parsed is not None:
            return LlmAnswer(parsed[0], parsed[1], raw, attempt)
    return LlmAnswer("No", "", raw, max_attempts, parse_failed=True)


def ask(
    question: str,
    chunk: Chunk,
    client: LlmClient,
    max_attempts: int = 3,
    backoff: float = 0.5,
) -> LlmAnswer:
    """Ask one question about one chunk; unparseable replies are retried, then read as No."""
    prompt = QUESTION_PROMPT.format(question=question, document=chunk.text)
    return _query(prompt, client, max_attempts, backoff)


def cross_verify(
    reason: str,
    chunk: Chunk,
    client: LlmClient,
    max_attempts: int = 3,
    backoff: float = 0.5,
) -> bool:
    """Does the chunk actually state ``reason``?  An empty reason never verifies."""
    if not reason.strip():
        return False
    prompt = VERIFY_PROMPT.format(reason=reason, document=chunk.text)
    return _query(prompt, client, max_attempts, backoff).yes


@dataclass(frozen=True)
class TranscriptEntry:
    chunk: int
    verdict: str
    reason: str
    attempts: int
    parse_failed: bool = False
    verified: bool | None = None
    demotion: str | None = None

    @property
    def counts(self) -> bool:
        return self.verdict == "Yes" and self.verified is True

    def to_dict(self) -> dict:
        return {
            "chunk": self.chunk,
            "verdict": self.verdict,
            "reason": self.reason,
            "attempts": self.attempts,
            "parseFailed": self.parse_failed,
            "verified": self.verified,
            "demotion": self.demotion,
        }


@dataclass(frozen=True)
class QuestionOutcome:
    node: str
    question: str
    depth: int
    answer: bool
    chunk: int | None  # chunk that produced the verified Yes
    entries: tuple[TranscriptEntry, ...]
    cached: bool = False

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "question": self.question,
            "depth": self.depth,
            "answer": "Yes" if self.answer else "No",
            "chunk": self.chunk,
            "cached": self.cached,
            "entries": [e.to_dict() for e in self.entries],
        }


@dataclass(frozen=True)
class DocRuleResult:
    rule_id: str
    satisfied: bool
    transcript: tuple[QuestionOutcome, ...]
    incomplete: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "ruleId": self.rule_id,
            "satisfied": self.satisfied,
            "incomplete": self.incomplete,
            "error": self.error,
            "transcript": [q.to_dict() for q in self.transcript],
        }


@dataclass(frozen=True)
class DocAuditReport:
    results: tuple[DocRuleResult, ...]
    chunks: int = 0

    @property
    def incomplete(self) -> bool:
        return any(r.incomplete for r in self.results)

    @property
    def satisfied(self) -> list[str]:
        return [r.rule_id for r in self.results if r.satisfied]

    def to_dict(self) -> dict:
        return {"chunks": self.chunks, "rules": [r.to_dict() for r in self.results]}


def _answer_question(
    node: str,
    question: str,
    depth: int,
    chunks: Sequence[Chunk],
    client: LlmClient,
    backoff: float,
    entries: list[TranscriptEntry],
) -> QuestionOutcome:
    for chunk in chunks:
        ans = ask(question, chunk, client, backoff=backoff)
        if not ans.yes:
            entries.append(TranscriptEntry(chunk.index, ans.verdict, ans.reason, ans.attempts, ans.parse_failed))
            continue
        if not ans.reason.strip():
            entries.append(TranscriptEntry(chunk.index, "Yes", "", ans.attempts, False, False, DEMOTED_EMPTY_REASON))
            continue
        verified = cross_verify(ans.reason, chunk, client, backoff=backoff)
        entry = TranscriptEntry(
            chunk.index, "Yes", ans.reason, ans.attempts, False, verified,
            None if verified else DEMOTED_UNVERIFIED,
        )
        entries.append(entry)
        if verified:
            return QuestionOutcome(node, question, depth, True, chunk.index, tuple(entries))
    return QuestionOutcome(node, question, depth, False, None, tuple(entries))


def evaluate_rule(
    rule: DocumentationRule,
    chunks: Sequence[Chunk],
    client: LlmClient,
    memo: dict[str, QuestionOutcome] | None = None,
    backoff: float = 0.5,
) -> DocRuleResult:
    """Walk the rule's question path; the first No stops the walk.

    A question is Yes when some chunk gives a Yes that the same chunk then
    verifies.  ``memo`` shares answers between rules over the same chunks.
    """
    memo = {} if memo is None else memo
    transcript: list[QuestionOutcome] = []
    for depth, (node, question) in enumerate(zip(rule.path, rule.questions)):
        if node in memo:
            outcome = replace(memo[node], depth=depth, cached=True)
        else:
            entries: list[TranscriptEntry] = []
            try:
                outcome = _answer_question(node, question, depth, chunks, client, backoff, entries)
            except AuditIncomplete as exc:
                partial = QuestionOutcome(node, question, depth, False, None, tuple(entries))
                result = DocRuleResult(rule.id, False, tuple(transcript) + (partial,), True, str(exc))
                raise AuditIncomplete(str(exc), result) from exc
            memo[node] = outcome
        transcript.append(outcome)
        if not outcome.answer:
            return DocRuleResult(rule.id, False, tuple(transcript))
    return DocRuleResult(rule.id, True, tuple(transcript))


def audit_documentation(
    document: str,
    client: LlmClient,
    chain: QuestionChain | None = None,
    tokenizer: Tokenizer = whitespace_tokens,
    size: int = DEFAULT_SIZE,
    overlap: int = DEFAULT_OVERLAP,
    backoff: float = 0.5,
) -> DocAuditReport:
    """Evaluate every rule; a rule whose queries fail is recorded as incomplete."""
    chain = chain or load_question_chain()
    chunks = chunk_document(document, tokenizer, size, overlap)
    memo: dict[str, QuestionOutcome] = {}
    results = []
    for rule in chain.rules:
        try:
            results.append(evaluate_rule(rule, chunks, client, memo, backoff))
        except AuditIncomplete as exc:
            results.append(exc.partial or DocRuleResult(rule.id, False, (), True, str(exc)))
    return DocAuditReport(tuple(results), len(chunks))
