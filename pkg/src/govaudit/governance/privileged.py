"""Caller-gated ("privileged") function detection.

For every dispatched function we walk its blocks with a small abstract
stack, following constant jump targets (which covers internal calls and
their returns) and both sides of every JUMPI.  A JUMPI whose condition is
``EQ(CALLER, x)``, possibly under ISZERO and with 160-bit masking of either
side, marks the function as privileged and ``x`` as the controller.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Protocol

from govaudit.chaindata.provider import normalize_address
from govaudit.evm import ControlFlowGraph, build_cfg, disassemble, extract_functions
from govaudit.evm.disasm import Bytecode
from govaudit.evm.opcodes import HALTING, info

SELF_GOVERNED = "SelfGoverned"
EXTERNAL = "External"
UNRESOLVED = "Unresolved"

PUSH20 = "push20Immediate"
STORAGE = "storageSlot"
SELF_ADDRESS = "selfAddress"
UNRESOLVED_SOURCE = "unresolved"

_MOD = 1 << 256
_UNK = ("?",)
_CALLER = ("caller",)
_SELF = ("self",)

# bounds on the abstract walk, per function
MAX_STATES_PER_BLOCK = 16
MAX_STEPS = 60_000
MAX_STACK = 64


class StorageReader(Protocol):
    def get_storage(self, address: str, slot: int) -> bytes: ...


@dataclass(frozen=True)
class PrivilegedFunctionFinding:
    selector: bytes
    comparand_source: str
    controller: str
    resolved_address: str | None = None
    slot: int | None = None
    slot_offset: int = 0  # byte offset of a packed address within its slot
    pc: int = 0  # offset of the gating JUMPI

    def to_dict(self) -> dict:
        out = {
            "selector": "0x" + self.selector.hex(),
            "comparandSource": self.comparand_source,
            "controller": self.controller,
            "resolvedAddress": self.resolved_address,
            "pc": self.pc,
        }
        if self.slot is not None:
            out["slot"] = hex(self.slot)
            out["slotOffset"] = self.slot_offset
        return out


def _const(v: int) -> tuple:
    return ("const", v % _MOD)


def _is_low_mask(v: int) -> bool:
    return v > 0 and (v & (v + 1)) == 0 and v.bit_length() >= 160


def _fold(name: str, a: tuple, b: tuple) -> tuple:
    """Binary op with ``a`` the top of stack."""
    if a[0] == "const" and b[0] == "const":
        x, y = a[1], b[1]
        if name == "ADD":
            return _const(x + y)
        if name == "SUB":
            return _const(x - y)
        if name == "MUL":
            return _const(x * y)
        if name == "DIV":
            return _const(x // y if y else 0)
        if name == "EXP":
            return _const(pow(x, y, _MOD))
        if name == "AND":
            return _const(x & y)
        if name == "OR":
            return _const(x | y)
        if name == "XOR":
            return _const(x ^ y)
        if name == "SHL":
            return _const(y << x if x < 256 else 0)
        if name == "SHR":
            return _const(y >> x if x < 256 else 0)
        if name == "EQ":
            return _const(int(x == y))
        return _UNK
    if name == "AND":
        for mask, other in ((a, b), (b, a)):
            if mask[0] == "const" and _is_low_mask(mask[1]) and other[0] in ("caller", "self", "sload", "const"):
                return other
        return _UNK
    if name == "EQ":
        return ("eq", a, b)
    if name == "DIV" and a[0] == "sload" and b[0] == "const":
        # a / 256**k  -> shift a packed slot right by k bytes
        k, rem = divmod(b[1].bit_length() - 1, 8)
        if b[1] and b[1] & (b[1] - 1) == 0 and rem == 0:
            return ("sload", a[1], a[2] + k)
        return _UNK
    if name == "SHR" and a[0] == "const" and b[0] == "sload" and a[1] % 8 == 0:
        return ("sload", b[1], b[2] + a[1] // 8)
    return _UNK


def _caller_comparand(cond: tuple) -> tuple | None:
    while cond[0] == "not":
        cond = cond[1]
    if cond[0] != "eq":
        return None
    a, b = cond[1], cond[2]
    if a == _CALLER and b != _CALLER:
        return b
    if b == _CALLER and a != _CALLER:
        return a
    return None


def _walk(cfg: ControlFlowGraph, entry: int) -> dict[tuple, int]:
    """Caller comparands found from ``entry``, mapped to the gating JUMPI offset."""
    found: dict[tuple, int] = {}
    seen: dict[int, set] = defaultdict(set)
    todo: list[tuple[int, tuple]] = [(entry, ())]
    steps = 0
    while todo and steps < MAX_STEPS:
        bid, start = todo.pop()
        if start in seen[bid] or len(seen[bid]) >= MAX_STATES_PER_BLOCK:
            continue
        seen[bid].add(start)
        stack = list(start)
        block = cfg.blocks[bid]

        def pop() -> tuple:
            return stack.pop() if stack else _UNK

        for ins in block.instructions:
            steps += 1
            name = ins.name
            if ins.is_push:
                stack.append(_const(ins.value))
            elif name == "CALLER":
                stack.append(_CALLER)
            elif name == "ADDRESS":
                stack.append(_SELF)
            elif name == "SLOAD":
                stack.append(("sload", pop(), 0))
            elif name == "ISZERO":
                x = pop()
                stack.append(_const(int(x[1] == 0)) if x[0] == "const" else ("not", x))
            elif name == "NOT":
                x = pop()
                stack.append(_const(~x[1]) if x[0] == "const" else _UNK)
            elif name.startswith("DUP"):
                n = int(name[3:])
                stack.append(stack[-n] if len(stack) >= n else _UNK)
            elif name.startswith("SWAP"):
                n = int(name[4:])
                while len(stack) < n + 1:
                    stack.insert(0, _UNK)
                stack[-1], stack[-1 - n] = stack[-1 - n], stack[-1]
            elif name in ("ADD", "SUB", "MUL", "DIV", "EXP", "AND", "OR", "XOR", "SHL", "SHR", "EQ"):
                a = pop()
                b = pop()
                stack.append(_fold(name, a, b))
            elif name == "JUMP":
                target = pop()
                if target[0] == "const":
                    dest = cfg.jumpdest_block(target[1])
                    if dest is not None:
                        todo.append((dest.id, tuple(stack[-MAX_STACK:])))
                break
            elif name == "JUMPI":
                target = pop()
                cond = pop()
                comparand = _caller_comparand(cond)
                if comparand is not None:
                    found.setdefault(comparand, ins.offset)
                state = tuple(stack[-MAX_STACK:])
                if target[0] == "const":
                    dest = cfg.jumpdest_block(target[1])
                    if dest is not None:
                        todo.append((dest.id, state))
                if bid + 1 < len(cfg.blocks):
                    todo.append((bid + 1, state))
                break
            elif name in HALTING:
                break
            else:
                op = info(ins.opcode)
                for _ in range(op.pops):
                    pop()
                stack.extend([_UNK] * op.pushes)
        else:
            # block ended without a terminator: falls through into the next JUMPDEST
            if bid + 1 < len(cfg.blocks):
                todo.append((bid + 1, tuple(stack[-MAX_STACK:])))
    return found


def _classify(
    selector: bytes,
    comparand: tuple,
    pc: int,
    governance: str,
    state: StorageReader | None,
) -> PrivilegedFunctionFinding:
    if comparand == _SELF:
        return PrivilegedFunctionFinding(selector, SELF_ADDRESS, SELF_GOVERNED, governance, pc=pc)
    if comparand[0] == "const" and comparand[1] < (1 << 160):
        addr = "0x" + comparand[1].to_bytes(20, "big").hex()
        controller = SELF_GOVERNED if addr == governance else EXTERNAL
        return PrivilegedFunctionFinding(selector, PUSH20, controller, addr, pc=pc)
    if comparand[0] == "sload" and comparand[1][0] == "const":
        slot, offset = comparand[1][1], comparand[2]
        if state is None or offset > 12:
            return PrivilegedFunctionFinding(selector, STORAGE, UNRESOLVED, None, slot, offset, pc)
        word = state.get_storage(governance, slot)
        addr = "0x" + word[12 - offset : 32 - offset].hex()
        controller = SELF_GOVERNED if addr == governance else EXTERNAL
        return PrivilegedFunctionFinding(selector, STORAGE, controller, addr, slot, offset, pc)
    return PrivilegedFunctionFinding(selector, UNRESOLVED_SOURCE, UNRESOLVED, pc=pc)


def detect_privileged_functions(
    runtime_bytecode: Bytecode,
    governance_address: str,
    state_provider: StorageReader | None = None,
) -> list[PrivilegedFunctionFinding]:
    """Findings for every dispatched function gated on ``msg.sender``.

    Storage comparands are read from ``governance_address`` through
    ``state_provider``; without one they stay Unresolved.
    """
    governance = normalize_address(governance_address)
    cfg = build_cfg(disassemble(runtime_bytecode))
    findings = []
    for fn in extract_functions(cfg):
        for comparand, pc in sorted(_walk(cfg, fn.entry_block).items(), key=lambda kv: kv[1]):
            findings.append(_classify(fn.selector, comparand, pc, governance, state_provider))
    return findings
