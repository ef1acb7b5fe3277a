"""Selector-dispatched function bodies.

A dispatcher arm is a block containing ``PUSH4 sel`` followed later in the
same block by ``EQ`` and ending in ``PUSH target; JUMPI``.  Every compiler
version exercised by the fixtures emits selectors this way, but binary-search
splits (``GT``/``LT``) are followed as plain dispatcher edges.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from govaudit.evm.cfg import ControlFlowGraph
from govaudit.evm.disasm import Instruction

NO_DISPATCHER = "no-dispatcher"


@dataclass(frozen=True)
class FunctionBody:
    selector: bytes
    entry_block: int
    blocks: tuple[int, ...]
    instructions: tuple[Instruction, ...]

    @property
    def selector_hex(self) -> str:
        return "0x" + self.selector.hex()


@dataclass(frozen=True)
class Dispatch:
    """Result of :func:`extract_functions`; iterates over the function bodies."""

    functions: tuple[FunctionBody, ...]
    dispatcher_blocks: frozenset[int] = frozenset()
    # fallback/receive and shared revert paths reachable without a selector match
    residual: tuple[int, ...] = ()
    diagnostics: tuple[str, ...] = field(default=())

    def __iter__(self) -> Iterator[FunctionBody]:
        return iter(self.functions)

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, i: int) -> FunctionBody:
        return self.functions[i]

    def by_selector(self, selector: bytes) -> FunctionBody | None:
        return next((f for f in self.functions if f.selector == selector), None)


def _arm(cfg: ControlFlowGraph, block_id: int) -> tuple[bytes, int] | None:
    """(selector, target block) if the block is a dispatcher arm."""
    ins = cfg.blocks[block_id].instructions
    if len(ins) < 4 or ins[-1].name != "JUMPI" or not ins[-2].is_push:
        return None
    target = cfg.jumpdest_block(ins[-2].value)
    if target is None:
        return None
    selector = None
    for i in ins[:-2]:
        if i.name == "PUSH4":
            selector = i.immediate
        elif i.name == "EQ" and selector is not None:
            return selector, target.id
    return None


def pushed_labels(cfg: ControlFlowGraph, block_id: int) -> list[int]:
    """JUMPDEST blocks whose offsets are pushed as constants in ``block_id``.

    Internal calls push their return address before jumping; the return jump
    itself never resolves statically, so pushed labels stand in for it.
    """
    out = []
    for ins in cfg.blocks[block_id].instructions:
        if ins.is_push and ins.opcode != 0x5F:
            target = cfg.jumpdest_block(ins.value)
            if target is not None:
                out.append(target.id)
    return out


def _reachable(cfg: ControlFlowGraph, starts: Iterable[int], stop: frozenset[int]) -> set[int]:
    seen: set[int] = set()
    todo = deque(s for s in starts if s not in stop)
    while todo:
        b = todo.popleft()
        if b in seen:
            continue
        seen.add(b)
        nexts = [e.dst for e in cfg.successors(b)] + pushed_labels(cfg, b)
        todo.extend(n for n in nexts if n not in seen and n not in stop)
    return seen


def extract_functions(cfg: ControlFlowGraph) -> Dispatch:
    if not cfg.blocks:
        return Dispatch((), diagnostics=(NO_DISPATCHER,))

    # Walk the dispatcher from the entry block along CFG edges, collecting arms
    # and never entering an arm's target.
    arms: dict[int, tuple[bytes, int]] = {}
    seen: set[int] = set()
    order: list[int] = []
    todo = deque([0])
    targets: set[int] = set()
    while todo:
        b = todo.popleft()
        if b in seen:
            continue
        seen.add(b)
        order.append(b)
        arm = _arm(cfg, b)
        if arm is not None:
            arms[b] = arm
            targets.add(arm[1])
        for e in cfg.successors(b):
            if e.dst not in seen and not (arm is not None and e.dst == arm[1]):
                todo.append(e.dst)

    if not arms:
        return Dispatch((), diagnostics=(NO_DISPATCHER,))

    # Dispatcher proper: walked blocks that can still reach an arm block.
    leads: set[int] = set(arms)
    changed = True
    while changed:
        changed = False
        for b in order:
            if b not in leads and any(e.dst in leads for e in cfg.successors(b) if e.dst not in targets):
                leads.add(b)
                changed = True
    dispatcher = frozenset(leads)
    residual = tuple(sorted(b for b in seen if b not in dispatcher and b not in targets))

    bodies: list[FunctionBody] = []
    selectors: set[bytes] = set()
    diagnostics: list[str] = []
    for b in sorted(arms, key=lambda k: cfg.blocks[k].start_offset):
        selector, target = arms[b]
        if selector in selectors:
            diagnostics.append(f"duplicate-arm:0x{selector.hex()}")
            continue
        selectors.add(selector)
        ids = tuple(sorted(_reachable(cfg, [target], dispatcher)))
        body = tuple(i for bid in ids for i in cfg.blocks[bid].instructions)
        bodies.append(FunctionBody(selector, target, ids, body))
    if cfg.unresolved:
        diagnostics.append(f"unresolved-jumps:{len(cfg.unresolved)}")
    return Dispatch(tuple(bodies), dispatcher, residual, tuple(diagnostics))
