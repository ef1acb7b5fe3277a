"""Bytecode <-> instruction conversion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from govaudit.evm.opcodes import BY_NAME, info, push_width

Bytecode = Union[bytes, bytearray, str]


def to_bytes(code: Bytecode) -> bytes:
    """Accept raw bytes or a hex string with an optional ``0x`` prefix."""
    if isinstance(code, (bytes, bytearray)):
        return bytes(code)
    text = "".join(code.split())
    if text[:2].lower() == "0x":
        text = text[2:]
    if len(text) % 2:
        raise ValueError(f"odd-length hex string ({len(text)} digits)")
    return bytes.fromhex(text)


@dataclass(frozen=True)
class Instruction:
    offset: int
    opcode: int
    # PUSH payload, always exactly the push width (zero-padded past code end)
    immediate: bytes = b""

    @property
    def name(self) -> str:
        return info(self.opcode).name

    @property
    def size(self) -> int:
        return 1 + len(self.immediate)

    @property
    def is_push(self) -> bool:
        return push_width(self.opcode) > 0 or self.opcode == 0x5F

    @property
    def value(self) -> int | None:
        """Integer value pushed by a PUSH instruction, else ``None``."""
        if self.opcode == 0x5F:
            return 0
        if not self.immediate:
            return None
        return int.from_bytes(self.immediate, "big")

    def encode(self) -> bytes:
        return bytes([self.opcode]) + self.immediate

    def __str__(self) -> str:
        if self.immediate:
            return f"{self.offset:04x}  {self.name} 0x{self.immediate.hex()}"
        return f"{self.offset:04x}  {self.name}"


def disassemble(code: Bytecode) -> list[Instruction]:
    """Decode ``code`` into instructions.

    Total: unknown bytes become INVALID-class single-byte instructions and a
    PUSH that runs past the end of the code gets its immediate zero-padded,
    the way the EVM reads past code end.
    """
    raw = to_bytes(code)
    out: list[Instruction] = []
    i, n = 0, len(raw)
    while i < n:
        op = raw[i]
        width = push_width(op)
        imm = raw[i + 1 : i + 1 + width]
        if len(imm) < width:
            imm = imm + bytes(width - len(imm))
        out.append(Instruction(i, op, imm))
        i += 1 + width
    return out


def serialize(instructions: Iterable[Instruction]) -> bytes:
    return b"".join(ins.encode() for ins in instructions)


def strip_push_arguments(instructions: Sequence[Instruction]) -> list[str]:
    """Opcode mnemonics in order with every PUSH payload dropped."""
    return [ins.name for ins in instructions]


def assemble(source: str) -> bytes:
    """Tiny assembler used to build hand-written fixtures.

    Tokens are whitespace separated mnemonics; a PUSHn is followed by its
    hex payload (``PUSH1 0x80``).  ``PUSH`` without a width picks the
    smallest width for the value.  ``@label`` defines a JUMPDEST label and
    ``PUSH2 :label`` pushes its offset.  ``;`` starts a comment.
    """
    tokens: list[str] = []
    for line in source.splitlines():
        tokens.extend(line.split(";", 1)[0].split())

    # two passes: label offsets first, with label pushes always PUSH2
    def emit(resolve: dict[str, int] | None) -> tuple[bytes, dict[str, int]]:
        out = bytearray()
        labels: dict[str, int] = {}
        it = iter(tokens)
        for tok in it:
            if tok.startswith("@"):
                labels[tok[1:]] = len(out)
                out.append(BY_NAME["JUMPDEST"])
                continue
            mnemonic = tok.upper()
            if mnemonic.startswith("PUSH") and mnemonic != "PUSH0":
                arg = next(it)
                if arg.startswith(":"):
                    target = 0 if resolve is None else resolve[arg[1:]]
                    width = int(mnemonic[4:] or 2)
                    payload = target.to_bytes(width, "big")
                else:
                    val = int(arg, 16) if arg.lower().startswith("0x") else int(arg)
                    if mnemonic == "PUSH":
                        width = max(1, (val.bit_length() + 7) // 8)
                    else:
                        width = int(mnemonic[4:])
                    payload = val.to_bytes(width, "big")
                out.append(0x5F + width)
                out += payload
            elif mnemonic.startswith("0X"):
                out += bytes.fromhex(mnemonic[2:])
            else:
                out.append(BY_NAME[mnemonic])
        return bytes(out), labels

    _, labels = emit(None)
    code, _ = emit(labels)
    return code
