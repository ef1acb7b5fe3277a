"""EVM bytecode disassembly, control-flow graphs and function extraction."""

from govaudit.evm.cfg import BasicBlock, ControlFlowGraph, Edge, build_cfg
from govaudit.evm.disasm import (
    Instruction,
    assemble,
    disassemble,
    serialize,
    strip_push_arguments,
    to_bytes,
)
from govaudit.evm.dispatch import Dispatch, FunctionBody, extract_functions
from govaudit.evm.hashing import compute_selector, keccak256

__all__ = [
    "BasicBlock",
    "ControlFlowGraph",
    "Dispatch",
    "Edge",
    "FunctionBody",
    "Instruction",
    "assemble",
    "build_cfg",
    "compute_selector",
    "disassemble",
    "extract_functions",
    "keccak256",
    "serialize",
    "strip_push_arguments",
    "to_bytes",
]
