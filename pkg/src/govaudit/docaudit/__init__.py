"""Documentation audit over a question chain answered by an LLM."""

from govaudit.docaudit.audit import (
    QUESTION_PROMPT,
    VERIFY_PROMPT,
    AuditIncomplete,
    DocAuditReport,
    DocRuleResult,
    LlmAnswer,
    QuestionOutcome,
    TranscriptEntry,
    ask,
    audit_documentation,
    cross_verify,
    evaluate_rule,
    parse_answer,
)
from govaudit.docaudit.chunking import Chunk, chunk_document, chunk_spans, whitespace_tokens
from govaudit.docaudit.llm import (
    HttpLlmClient,
    LlmClient,
    LlmError,
    LlmTransportError,
    ScriptedLlm,
    ScriptExhausted,
    ScriptRecord,
)
from govaudit.docaudit.rules import (
    RULE_IDS,
    DocumentationRule,
    QuestionChain,
    QuestionChainNode,
    load_question_chain,
    parse_question_chain,
)

__all__ = [
    "QUESTION_PROMPT",
    "RULE_IDS",
    "VERIFY_PROMPT",
    "AuditIncomplete",
    "Chunk",
    "DocAuditReport",
    "DocRuleResult",
    "DocumentationRule",
    "HttpLlmClient",
    "LlmAnswer",
    "LlmClient",
    "LlmError",
    "LlmTransportError",
    "QuestionChain",
    "QuestionChainNode",
    "QuestionOutcome",
    "ScriptExhausted",
    "ScriptRecord",
    "ScriptedLlm",
    "TranscriptEntry",
    "ask",
    "audit_documentation",
    "chunk_document",
    "chunk_spans",
    "cross_verify",
    "evaluate_rule",
    "load_question_chain",
    "parse_answer",
    "parse_question_chain",
    "whitespace_tokens",
]
