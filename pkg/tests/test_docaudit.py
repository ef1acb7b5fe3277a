from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from govaudit.docaudit import (
    RULE_IDS,
    AuditIncomplete,
    HttpLlmClient,
    LlmError,
    LlmTransportError,
    ScriptedLlm,
    ScriptExhausted,
    ScriptRecord,
    ask,
    audit_documentation,
    chunk_document,
    chunk_spans,
    cross_verify,
    evaluate_rule,
    load_question_chain,
    parse_answer,
    parse_question_chain,
)
from govaudit.docaudit.audit import DEMOTED_EMPTY_REASON, DEMOTED_UNVERIFIED
from govaudit.docaudit.chunking import Chunk
from govaudit.docaudit.llm import complete_with_retry
from support import FIXTURES

CHAIN = load_question_chain()
DOCS = FIXTURES / "docs"


# ------------------------------------------------------------------ chunking


def test_two_chunks_for_thirteen_thousand_tokens():
    assert chunk_spans(13_000) == [(0, 12_000), (10_000, 13_000)]
    doc = " ".join(f"w{i}" for i in range(13_000))
    a, b = chunk_document(doc)
    assert a.text.split()[0] == "w0" and a.text.split()[-1] == "w11999"
    assert b.text.split()[0] == "w10000" and b.text.split()[-1] == "w12999"


def test_small_and_empty_documents():
    assert chunk_spans(0) == []
    assert chunk_spans(5) == [(0, 5)]
    assert chunk_document("  ") == []
    with pytest.raises(ValueError):
        chunk_spans(10, size=5, overlap=5)


@given(st.integers(0, 5000), st.integers(2, 400), st.data())
def test_chunks_cover_everything_with_fixed_overlap(n, size, data):
    overlap = data.draw(st.integers(0, size - 1))
    spans = chunk_spans(n, size, overlap)
    covered = set()
    for s, e in spans:
        assert 0 <= s < e <= n and e - s <= size
        covered.update(range(s, e))
    assert covered == set(range(n))
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert s2 == s1 + size - overlap
        assert e1 - s2 == overlap
    # only the last chunk may be short
    assert all(e - s == size for s, e in spans[:-1])


# ------------------------------------------------------------------ rules


def test_shipped_chain():
    assert tuple(r.id for r in CHAIN.rules) == RULE_IDS
    assert CHAIN.rule("MemberParticipation").path == ("governance", "membership", "participation")
    assert not CHAIN.rule("MemberParticipation").reconstructed
    assert CHAIN.roots == ["governance"]
    with pytest.raises(KeyError):
        CHAIN.rule("Nope")


def test_chain_validation():
    with pytest.raises(ValueError, match="unknown node"):
        parse_question_chain({"nodes": {"a": {"question": "?"}}, "rules": [{"id": "r", "path": ["a", "b"]}]})
    with pytest.raises(ValueError, match="cycle"):
        parse_question_chain({"nodes": {"a": {"question": "?"}, "b": {"question": "?"}},
                              "rules": [{"id": "r", "path": ["a", "b"]}, {"id": "s", "path": ["b", "a"]}]})


# ------------------------------------------------------------------ answers


@pytest.mark.parametrize("text,expected", [
    ("Result: Yes\nReason: It says so.", ("Yes", "It says so.")),
    ("result:no", ("No", "")),
    ("**Result:** YES\nReason: x", ("Yes", "x")),
    ("I think yes", None),
])
def test_parse_answer(text, expected):
    assert parse_answer(text) == expected


class Oracle:
    """Answers question prompts from ``answers`` and verification prompts from ``checks``."""

    def __init__(self, answers: dict, checks: dict | None = None):
        self.answers = answers
        self.checks = checks or {}
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if prompt.startswith("Decide"):
            for reason, ok in self.checks.items():
                if f"Sentence: {reason}\n" in prompt:
                    return f"Result: {'Yes' if ok else 'No'}"
            return "Result: Yes"
        for q, (verdict, reason) in self.answers.items():
            if f"Question: {q}\n" in prompt:
                return f"Result: {verdict}\nReason: {reason}"
        return "Result: No\nReason: "


CHUNK = Chunk(0, 0, 3, "some document text")


def test_unparseable_replies_are_retried_then_read_as_no():
    client = ScriptedLlm([ScriptRecord("Question", "hmm", repeat=True)])
    ans = ask("Q?", CHUNK, client, backoff=0)
    assert ans.verdict == "No" and ans.parse_failed and ans.attempts == 3
    client = ScriptedLlm([ScriptRecord("Question", "hmm"), ScriptRecord("Question", "Result: Yes\nReason: r")])
    assert ask("Q?", CHUNK, client, backoff=0).attempts == 2


def test_empty_reason_never_verifies():
    client = ScriptedLlm([])
    assert not cross_verify("  ", CHUNK, client)
    assert client.prompts == []


class Flaky:
    def __init__(self, failures, inner):
        self.failures, self.inner = failures, inner

    def complete(self, prompt):
        if self.failures:
            self.failures -= 1
            raise LlmTransportError("503")
        return self.inner.complete(prompt)


def test_transport_errors_are_retried():
    assert complete_with_retry(Flaky(2, Oracle({})), "p", backoff=0).startswith("Result")
    with pytest.raises(LlmTransportError):
        complete_with_retry(Flaky(3, Oracle({})), "p", backoff=0)


# ------------------------------------------------------------------ rule evaluation

MP = CHAIN.rule("MemberParticipation")
outcome = st.sampled_from(["no", "unverified", "empty", "yes"])


def _client_for(outcomes):
    answers, checks = {}, {}
    for q, o in zip(MP.questions, outcomes):
        reason = "" if o == "empty" else f"because {q}"
        answers[q] = ("No" if o == "no" else "Yes", reason)
        checks[reason] = o == "yes"
    return Oracle(answers, checks)


@given(st.lists(outcome, min_size=3, max_size=3))
def test_rule_holds_iff_every_question_is_a_verified_yes(outcomes):
    result = evaluate_rule(MP, [CHUNK], _client_for(outcomes), backoff=0)
    assert result.satisfied == all(o == "yes" for o in outcomes)
    # the walk stops at the first question that is not a verified Yes
    first_fail = next((i for i, o in enumerate(outcomes) if o != "yes"), 2)
    assert len(result.transcript) == first_fail + 1


def test_demotions_are_recorded():
    r = evaluate_rule(MP, [CHUNK], _client_for(["unverified", "yes", "yes"]), backoff=0)
    (entry,) = r.transcript[0].entries
    assert entry.demotion == DEMOTED_UNVERIFIED and not entry.counts
    r = evaluate_rule(MP, [CHUNK], _client_for(["empty", "yes", "yes"]), backoff=0)
    assert r.transcript[0].entries[0].demotion == DEMOTED_EMPTY_REASON


def test_yes_in_a_later_chunk_counts():
    chunks = [Chunk(0, 0, 1, "alpha"), Chunk(1, 1, 2, "beta")]

    class PerChunk(Oracle):
        def complete(self, prompt):
            if prompt.startswith("Decide"):
                return "Result: Yes"
            return "Result: Yes\nReason: beta" if prompt.endswith("beta") else "Result: No"

    r = evaluate_rule(MP, chunks, PerChunk({}), backoff=0)
    assert r.satisfied and all(q.chunk == 1 for q in r.transcript)


def test_shared_questions_are_asked_once():
    client = Oracle({q: ("Yes", "r " + q) for q in (n.question for n in CHAIN.nodes.values())})
    report = audit_documentation("doc text", client, backoff=0)
    asked = [p for p in client.prompts if p.startswith("You are")]
    assert len(asked) == len(CHAIN.nodes)
    assert len(report.satisfied) == 6
    assert report.results[1].transcript[0].cached


def test_persistent_failure_marks_rules_incomplete():
    class Down:
        def complete(self, prompt):
            raise LlmTransportError("down")

    report = audit_documentation("doc", Down(), backoff=0)
    assert report.incomplete and all(r.incomplete for r in report.results)
    assert not report.satisfied


def test_incomplete_carries_partial_transcript():
    client = ScriptedLlm([ScriptRecord("support governance", "Result: Yes\nReason: r"),
                          ScriptRecord("Sentence: r", "Result: Yes")])
    with pytest.raises(AuditIncomplete) as info:
        evaluate_rule(MP, [CHUNK], client, backoff=0)
    partial = info.value.partial
    assert partial.incomplete and partial.transcript[0].answer


# ------------------------------------------------------------------ fixtures and clients


def test_harbor_fixture():
    text = (DOCS / "harbor.md").read_text()
    report = audit_documentation(text, ScriptedLlm.from_jsonl(DOCS / "harbor.jsonl"), backoff=0)
    assert report.satisfied == ["MemberParticipation", "VotingPower", "GovernanceProcessGuide"]
    guardian = report.results[-1].transcript[1].entries[0]
    assert guardian.verdict == "Yes" and guardian.demotion == DEMOTED_UNVERIFIED


def test_identical_script_gives_identical_report():
    text = (DOCS / "harbor.md").read_text()
    runs = [json.dumps(audit_documentation(text, ScriptedLlm.from_jsonl(DOCS / "harbor.jsonl"), backoff=0).to_dict(),
                       sort_keys=True) for _ in range(2)]
    assert runs[0] == runs[1]


def test_script_loading_and_exhaustion(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"matchSubstring": "x"}\n')
    with pytest.raises(ValueError, match="bad.jsonl:1"):
        ScriptedLlm.from_jsonl(bad)
    llm = ScriptedLlm([ScriptRecord("a", "one"), ScriptRecord("a", "two")])
    assert [llm.complete("a"), llm.complete("a")] == ["one", "two"]
    with pytest.raises(ScriptExhausted):
        llm.complete("a")


class FakeResponse:
    def __init__(self, status, body=None, text=""):
        self.status_code, self._body, self.text = status, body, text

    def json(self):
        if self._body is None:
            raise ValueError("not json")
        return self._body


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.sent = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.sent.append((url, json, headers))
        return self.responses.pop(0)


def test_http_client():
    session = FakeSession([FakeResponse(200, {"text": "Result: Yes"}), FakeResponse(503), FakeResponse(400, text="bad"),
                           FakeResponse(200, None)])
    client = HttpLlmClient("http://llm", api_key="k", model="m", session=session)
    assert client.complete("p") == "Result: Yes"
    assert session.sent[0] == ("http://llm", {"prompt": "p", "model": "m"}, {"Authorization": "Bearer k"})
    with pytest.raises(LlmTransportError):
        client.complete("p")
    with pytest.raises(LlmError):
        client.complete("p")
    with pytest.raises(LlmError, match="malformed"):
        client.complete("p")


def test_http_client_needs_url():
    with pytest.raises(LlmError):
        HttpLlmClient.from_env({})
    assert HttpLlmClient.from_env({"GOVAUDIT_LLM_URL": "http://x"}).url == "http://x"


@settings(max_examples=25)
@given(st.lists(st.sampled_from(["yes", "no"]), min_size=len(CHAIN.nodes), max_size=len(CHAIN.nodes)))
def test_rule_results_follow_node_answers(bits):
    answers = {n.question: ("Yes" if b == "yes" else "No", "r" + n.id) for n, b in zip(CHAIN.nodes.values(), bits)}
    report = audit_documentation("doc", Oracle(answers), backoff=0)
    yes = {n.id for n, b in zip(CHAIN.nodes.values(), bits) if b == "yes"}
    for rule, result in zip(CHAIN.rules, report.results):
        assert result.satisfied == (set(rule.path) <= yes)
