"""Basic blocks and control-flow edges over disassembled code."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from govaudit.evm.disasm import Instruction
from govaudit.evm.opcodes import HALTING, TERMINATORS

FALLTHROUGH = "fallthrough"
JUMP = "jump"
CONDITIONAL = "conditional"


@dataclass(frozen=True)
class BasicBlock:
    id: int
    start_offset: int
    instructions: tuple[Instruction, ...]

    @property
    def terminator(self) -> str | None:
        last = self.instructions[-1].name
        return last if last in TERMINATORS else None

    @property
    def end_offset(self) -> int:
        last = self.instructions[-1]
        return last.offset + last.size


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str


@dataclass(frozen=True)
class ControlFlowGraph:
    blocks: tuple[BasicBlock, ...]
    edges: tuple[Edge, ...]
    # ids of blocks ending in a JUMP/JUMPI whose target could not be resolved
    unresolved: tuple[int, ...] = ()
    _by_offset: dict[int, int] = field(default_factory=dict, repr=False, compare=False)
    _succ: dict[int, tuple[Edge, ...]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._by_offset.update({b.start_offset: b.id for b in self.blocks})
        succ: dict[int, list[Edge]] = {}
        for e in self.edges:
            succ.setdefault(e.src, []).append(e)
        self._succ.update({k: tuple(v) for k, v in succ.items()})

    def block_at(self, offset: int) -> BasicBlock | None:
        bid = self._by_offset.get(offset)
        return None if bid is None else self.blocks[bid]

    def jumpdest_block(self, offset: int) -> BasicBlock | None:
        """Block starting at ``offset`` if it begins with a JUMPDEST."""
        block = self.block_at(offset)
        if block is None or block.instructions[0].name != "JUMPDEST":
            return None
        return block

    def successors(self, block_id: int) -> tuple[Edge, ...]:
        return self._succ.get(block_id, ())

    @property
    def instructions(self) -> list[Instruction]:
        return [ins for b in self.blocks for ins in b.instructions]

    def to_dot(self) -> str:
        lines = ["digraph cfg {", '  node [shape=box fontname="monospace"];']
        for b in self.blocks:
            body = "\\l".join(str(i) for i in b.instructions) + "\\l"
            lines.append(f'  b{b.id} [label="{body}"];')
        style = {FALLTHROUGH: "dashed", JUMP: "solid", CONDITIONAL: "bold"}
        for e in self.edges:
            lines.append(f"  b{e.src} -> b{e.dst} [style={style[e.kind]}];")
        for bid in self.unresolved:
            lines.append(f'  b{bid} -> unresolved [style=dotted];')
        lines.append("}")
        return "\n".join(lines)


def _split(instructions: Sequence[Instruction]) -> list[list[Instruction]]:
    groups: list[list[Instruction]] = []
    current: list[Instruction] = []
    for ins in instructions:
        if ins.name == "JUMPDEST" and current:
            groups.append(current)
            current = []
        current.append(ins)
        if ins.name in TERMINATORS:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    return groups


def build_cfg(instructions: Sequence[Instruction]) -> ControlFlowGraph:
    """Split at JUMPDESTs and after terminators; resolve PUSH-then-JUMP edges.

    Only a PUSH immediately preceding the JUMP/JUMPI resolves a target, and
    only if it lands on a JUMPDEST; everything else is recorded as unresolved.
    """
    blocks = tuple(
        BasicBlock(i, group[0].offset, tuple(group)) for i, group in enumerate(_split(instructions))
    )
    dest = {b.start_offset: b.id for b in blocks if b.instructions[0].name == "JUMPDEST"}
    edges: list[Edge] = []
    unresolved: list[int] = []
    for b in blocks:
        last = b.instructions[-1]
        nxt = b.id + 1 if b.id + 1 < len(blocks) else None
        if last.name in ("JUMP", "JUMPI"):
            prev = b.instructions[-2] if len(b.instructions) > 1 else None
            target = dest.get(prev.value) if prev is not None and prev.is_push else None
            if target is None:
                unresolved.append(b.id)
            else:
                edges.append(Edge(b.id, target, JUMP if last.name == "JUMP" else CONDITIONAL))
            if last.name == "JUMPI" and nxt is not None:
                edges.append(Edge(b.id, nxt, FALLTHROUGH))
        elif last.name not in HALTING and nxt is not None:
            edges.append(Edge(b.id, nxt, FALLTHROUGH))
    return ControlFlowGraph(blocks, tuple(edges), tuple(unresolved))
