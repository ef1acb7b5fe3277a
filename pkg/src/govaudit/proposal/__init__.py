"""Proposal audits: code actions, description intentions and their consistency."""

from govaudit.proposal.actions import (
    SKIP_EOA,
    SKIP_GOVERNANCE,
    CodeAction,
    TargetImmutabilityResult,
    check_target_immutability,
    extract_code_action,
    extract_code_actions,
)
from govaudit.proposal.consistency import (
    CATEGORIES,
    CODE_MUTABILITY,
    EXCLUDED,
    INCOMPLETE_FUNCTION,
    INCOMPLETE_PARAMETER,
    INCORRECT_PROPOSAL,
    LACK_OF_CODE_ACTION,
    LACK_OF_DESCRIPTION_INTENTION,
    MENTIONED,
    NORMAL,
    ConsistencyReport,
    FunctionMatch,
    InconsistencyFinding,
    Matchers,
    ParameterMatch,
    ProposalAudit,
    audit_proposal,
    classify_incident,
    detect_inconsistencies,
    identifier_words,
    lexical_similarity,
    match_function,
    match_parameter,
)
from govaudit.proposal.model import (
    ProposalCall,
    ProposalFormatError,
    ProposalRecord,
    load_proposals,
    parse_call,
    parse_proposal,
)
from govaudit.proposal.text import (
    DescriptionIntention,
    ParsedToken,
    PatternParser,
    classify_code_related,
    description_intentions,
    extract_intentions,
    split_sentences,
    tokenize,
)

__all__ = [
    "CATEGORIES",
    "CODE_MUTABILITY",
    "EXCLUDED",
    "INCOMPLETE_FUNCTION",
    "INCOMPLETE_PARAMETER",
    "INCORRECT_PROPOSAL",
    "LACK_OF_CODE_ACTION",
    "LACK_OF_DESCRIPTION_INTENTION",
    "MENTIONED",
    "NORMAL",
    "SKIP_EOA",
    "SKIP_GOVERNANCE",
    "CodeAction",
    "ConsistencyReport",
    "DescriptionIntention",
    "FunctionMatch",
    "InconsistencyFinding",
    "Matchers",
    "ParameterMatch",
    "ParsedToken",
    "PatternParser",
    "ProposalAudit",
    "ProposalCall",
    "ProposalFormatError",
    "ProposalRecord",
    "TargetImmutabilityResult",
    "audit_proposal",
    "check_target_immutability",
    "classify_code_related",
    "classify_incident",
    "description_intentions",
    "detect_inconsistencies",
    "extract_code_action",
    "extract_code_actions",
    "extract_intentions",
    "identifier_words",
    "lexical_similarity",
    "load_proposals",
    "match_function",
    "match_parameter",
    "parse_call",
    "parse_proposal",
    "split_sentences",
    "tokenize",
]
