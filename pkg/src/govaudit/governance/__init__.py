"""Governance-contract audits: soundness, independence and immutability."""

from govaudit.governance.addresses import (
    compute_create2_address,
    compute_create_address,
    rlp_encode,
    to_checksum_address,
)
from govaudit.governance.chain import (
    CreationChain,
    CreationStep,
    IntegrityError,
    MutabilityVerdict,
    assess_mutability,
    build_creation_chain,
    can_self_destruct,
    self_destruct_reasons,
)
from govaudit.governance.privileged import (
    EXTERNAL,
    SELF_GOVERNED,
    UNRESOLVED,
    PrivilegedFunctionFinding,
    detect_privileged_functions,
)
from govaudit.governance.soundness import (
    SoundnessVerdict,
    check_soundness,
    load_platform_deployers,
)

__all__ = [
    "EXTERNAL",
    "SELF_GOVERNED",
    "UNRESOLVED",
    "CreationChain",
    "CreationStep",
    "IntegrityError",
    "MutabilityVerdict",
    "PrivilegedFunctionFinding",
    "SoundnessVerdict",
    "assess_mutability",
    "build_creation_chain",
    "can_self_destruct",
    "check_soundness",
    "compute_create2_address",
    "compute_create_address",
    "detect_privileged_functions",
    "load_platform_deployers",
    "rlp_encode",
    "self_destruct_reasons",
    "to_checksum_address",
]
