"""Contract-ABI signature parsing, decoding and encoding.

Values use plain Python types: addresses are lowercase ``0x`` strings,
integers are ``int``, ``bytes``/``bytesN`` are ``bytes``, arrays are lists
and tuples are tuples.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Sequence

from govaudit.evm.hashing import compute_selector

WORD = 32


class DecodeError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        super().__init__(message if offset is None else f"{message} (at byte {offset})")


@dataclass(frozen=True)
class AbiType:
    base: str  # "uint", "int", "address", "bool", "bytes", "string", "fixedbytes", "tuple", "array"
    bits: int = 0  # uintN/intN width, bytesN length
    components: tuple[AbiType, ...] = ()  # tuple members or the array element
    length: int | None = None  # fixed array length

    @property
    def dynamic(self) -> bool:
        if self.base in ("bytes", "string"):
            return True
        if self.base == "array":
            return self.length is None or self.components[0].dynamic
        if self.base == "tuple":
            return any(c.dynamic for c in self.components)
        return False

    def head_size(self) -> int:
        if self.dynamic:
            return WORD
        if self.base == "array":
            return self.length * self.components[0].head_size()
        if self.base == "tuple":
            return sum(c.head_size() for c in self.components)
        return WORD

    @property
    def element(self) -> AbiType:
        return self.components[0]

    def __str__(self) -> str:
        if self.base in ("uint", "int"):
            return f"{self.base}{self.bits}"
        if self.base == "fixedbytes":
            return f"bytes{self.bits}"
        if self.base == "array":
            return f"{self.element}[{'' if self.length is None else self.length}]"
        if self.base == "tuple":
            return "(" + ",".join(str(c) for c in self.components) + ")"
        return self.base


def _split_top(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    tail = text[start:]
    if parts or tail.strip():
        parts.append(tail)
    return [p.strip() for p in parts]


_ARRAY_SUFFIX = re.compile(r"\[(\d*)\]$")


def parse_type(text: str) -> AbiType:
    text = text.strip()
    m = _ARRAY_SUFFIX.search(text)
    if m:
        inner = parse_type(text[: m.start()])
        return AbiType("array", components=(inner,), length=int(m.group(1)) if m.group(1) else None)
    if text.startswith("("):
        if not text.endswith(")"):
            raise ValueError(f"malformed tuple type {text!r}")
        return AbiType("tuple", components=tuple(parse_type(p) for p in _split_top(text[1:-1])))
    if text in ("address", "bool", "string", "bytes"):
        return AbiType(text)
    if text in ("uint", "int"):
        return AbiType(text, 256)
    m = re.fullmatch(r"(u?int)(\d+)", text)
    if m:
        bits = int(m.group(2))
        if bits % 8 or not 8 <= bits <= 256:
            raise ValueError(f"bad integer width in {text!r}")
        return AbiType(m.group(1), bits)
    m = re.fullmatch(r"bytes(\d+)", text)
    if m and 1 <= int(m.group(1)) <= 32:
        return AbiType("fixedbytes", int(m.group(1)))
    if text == "function":
        return AbiType("fixedbytes", 24)
    raise ValueError(f"unsupported ABI type {text!r}")


def parse_signature(signature: str) -> tuple[str, list[AbiType]]:
    """Split ``name(type1,type2)`` into the name and parsed parameter types."""
    m = re.fullmatch(r"\s*([A-Za-z_$][\w$]*)\s*\((.*)\)\s*", signature)
    if not m:
        raise ValueError(f"not a canonical signature: {signature!r}")
    return m.group(1), [parse_type(p) for p in _split_top(m.group(2))]


def canonical_signature(name: str, types: Sequence[AbiType]) -> str:
    return f"{name}({','.join(str(t) for t in types)})"


def abi_entry_signature(entry: dict) -> str:
    """Canonical signature of a JSON-ABI function entry (tuples expanded)."""

    def type_of(param: dict) -> str:
        t = param["type"]
        if t.startswith("tuple"):
            inner = "(" + ",".join(type_of(c) for c in param.get("components", [])) + ")"
            return inner + t[len("tuple") :]
        return t

    return f"{entry['name']}({','.join(type_of(p) for p in entry.get('inputs', []))})"


@dataclass(frozen=True)
class TypedParam:
    solidity_type: str
    value: Any

    def to_dict(self) -> dict:
        return {"type": self.solidity_type, "value": to_jsonable(self.value)}


def to_jsonable(value: Any) -> Any:
    if isinstance(value, bytes):
        return "0x" + value.hex()
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, int) and not isinstance(value, bool) and abs(value) >= 2**53:
        return str(value)
    return value


# ---------------------------------------------------------------- decoding


def _word(data: bytes, pos: int) -> bytes:
    if pos < 0 or pos + WORD > len(data):
        raise DecodeError("read past end of data", pos)
    return data[pos : pos + WORD]


def _uint_at(data: bytes, pos: int) -> int:
    return int.from_bytes(_word(data, pos), "big")


def _decode_static_word(t: AbiType, w: bytes, pos: int) -> Any:
    n = int.from_bytes(w, "big")
    if t.base == "uint":
        if n >> t.bits:
            raise DecodeError(f"value does not fit {t}", pos)
        return n
    if t.base == "int":
        signed = n - (1 << 256) if n >> 255 else n
        if not -(1 << (t.bits - 1)) <= signed < (1 << (t.bits - 1)):
            raise DecodeError(f"value does not fit {t}", pos)
        return signed
    if t.base == "address":
        if w[:12] != bytes(12):
            raise DecodeError("dirty address padding", pos)
        return "0x" + w[12:].hex()
    if t.base == "bool":
        if n > 1:
            raise DecodeError("bool out of range", pos)
        return bool(n)
    if t.base == "fixedbytes":
        if any(w[t.bits :]):
            raise DecodeError(f"dirty {t} padding", pos)
        return w[: t.bits]
    raise AssertionError(t)


def _decode(t: AbiType, data: bytes, base: int, head: int) -> Any:
    """Decode one value whose head slot is at ``head``; ``base`` anchors offsets."""
    if t.dynamic:
        offset = _uint_at(data, head)
        start = base + offset
        if start > len(data):
            raise DecodeError("offset points past end of data", head)
        return _decode_tail(t, data, start)
    if t.base == "array":
        size = t.element.head_size()
        return [_decode(t.element, data, base, head + i * size) for i in range(t.length)]
    if t.base == "tuple":
        return tuple(_decode_seq(t.components, data, base, head))
    return _decode_static_word(t, _word(data, head), head)


def _decode_tail(t: AbiType, data: bytes, start: int) -> Any:
    if t.base in ("bytes", "string"):
        length = _uint_at(data, start)
        if start + WORD + length > len(data):
            raise DecodeError(f"{t} length {length} runs past end of data", start)
        raw = data[start + WORD : start + WORD + length]
        if t.base == "bytes":
            return raw
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("string is not valid UTF-8", start) from exc
    if t.base == "array":
        if t.length is None:
            count = _uint_at(data, start)
            body = start + WORD
        else:
            count, body = t.length, start
        size = t.element.head_size()
        if count * size > len(data) - body:
            raise DecodeError(f"array length {count} runs past end of data", start)
        return [_decode(t.element, data, body, body + i * size) for i in range(count)]
    if t.base == "tuple":
        return tuple(_decode_seq(t.components, data, start, start))
    raise AssertionError(t)


def _decode_seq(types: Sequence[AbiType], data: bytes, base: int, head: int) -> list[Any]:
    out = []
    for t in types:
        out.append(_decode(t, data, base, head))
        head += t.head_size()
    return out


def decode_values(types: Sequence[AbiType], data: bytes) -> list[Any]:
    return _decode_seq(types, bytes(data), 0, 0)


def decode_calldata(signature: str, calldata: bytes) -> list[TypedParam]:
    """Decode ``calldata`` (selector included) against a canonical signature."""
    name, types = parse_signature(signature)
    calldata = bytes(calldata)
    if len(calldata) < 4:
        raise DecodeError("calldata shorter than a selector", 0)
    expected = compute_selector(canonical_signature(name, types))
    if calldata[:4] != expected:
        raise DecodeError(f"selector 0x{calldata[:4].hex()} does not match {signature} (0x{expected.hex()})", 0)
    values = decode_values(types, calldata[4:])
    return [TypedParam(str(t), v) for t, v in zip(types, values)]


# ---------------------------------------------------------------- encoding


def _encode_static_word(t: AbiType, v: Any) -> bytes:
    if t.base == "uint":
        return int(v).to_bytes(WORD, "big")
    if t.base == "int":
        return (int(v) % (1 << 256)).to_bytes(WORD, "big")
    if t.base == "address":
        raw = bytes.fromhex(v[2:]) if isinstance(v, str) else bytes(v)
        return bytes(12) + raw.rjust(20, b"\0")
    if t.base == "bool":
        return int(bool(v)).to_bytes(WORD, "big")
    if t.base == "fixedbytes":
        return bytes(v).ljust(WORD, b"\0")
    raise AssertionError(t)


def _pad(raw: bytes) -> bytes:
    return raw + bytes(-len(raw) % WORD)


def _encode(t: AbiType, v: Any) -> bytes:
    if t.base == "bytes":
        return len(v).to_bytes(WORD, "big") + _pad(bytes(v))
    if t.base == "string":
        raw = v.encode("utf-8")
        return len(raw).to_bytes(WORD, "big") + _pad(raw)
    if t.base == "array":
        body = encode_values([t.element] * len(v), v)
        return body if t.length is not None else len(v).to_bytes(WORD, "big") + body
    if t.base == "tuple":
        return encode_values(t.components, v)
    return _encode_static_word(t, v)


def encode_values(types: Sequence[AbiType], values: Sequence[Any]) -> bytes:
    heads, tails = [], []
    head_len = sum(t.head_size() for t in types)
    for t, v in zip(types, values):
        if t.dynamic:
            heads.append((head_len + sum(len(x) for x in tails)).to_bytes(WORD, "big"))
            tails.append(_encode(t, v))
        else:
            heads.append(_encode(t, v))
    return b"".join(heads) + b"".join(tails)


def encode_call(signature: str, values: Sequence[Any]) -> bytes:
    name, types = parse_signature(signature)
    return compute_selector(canonical_signature(name, types)) + encode_values(types, values)
