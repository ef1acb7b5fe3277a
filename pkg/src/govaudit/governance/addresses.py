"""CREATE / CREATE2 address derivation."""

from __future__ import annotations

from govaudit.evm.disasm import Bytecode, to_bytes
from govaudit.evm.hashing import keccak256


def _rlp_bytes(raw: bytes) -> bytes:
    if len(raw) == 1 and raw[0] < 0x80:
        return raw
    return _rlp_length(len(raw), 0x80) + raw


def _rlp_length(n: int, offset: int) -> bytes:
    if n < 56:
        return bytes([offset + n])
    encoded = n.to_bytes((n.bit_length() + 7) // 8, "big")
    return bytes([offset + 55 + len(encoded)]) + encoded


def rlp_encode(item) -> bytes:
    """RLP for the shapes address derivation needs: bytes, ints and lists."""
    if isinstance(item, int):
        if item < 0:
            raise ValueError("RLP cannot encode negative integers")
        return _rlp_bytes(item.to_bytes((item.bit_length() + 7) // 8, "big"))
    if isinstance(item, (bytes, bytearray)):
        return _rlp_bytes(bytes(item))
    if isinstance(item, (list, tuple)):
        body = b"".join(rlp_encode(x) for x in item)
        return _rlp_length(len(body), 0xC0) + body
    raise TypeError(f"cannot RLP-encode {type(item).__name__}")


def _address(value: Bytecode) -> bytes:
    raw = to_bytes(value)
    if len(raw) != 20:
        raise ValueError(f"address must be 20 bytes, got {len(raw)}")
    return raw


def compute_create_address(creator: Bytecode, nonce: int) -> bytes:
    """Address of the contract ``creator`` deploys with CREATE at ``nonce``."""
    if not 0 <= nonce < 2**64:
        raise ValueError("nonce out of range")
    return keccak256(rlp_encode([_address(creator), nonce]))[12:]


def compute_create2_address(creator: Bytecode, salt: Bytecode, init_code: Bytecode) -> bytes:
    salt_raw = to_bytes(salt)
    if len(salt_raw) != 32:
        raise ValueError(f"salt must be 32 bytes, got {len(salt_raw)}")
    digest = keccak256(b"\xff" + _address(creator) + salt_raw + keccak256(to_bytes(init_code)))
    return digest[12:]


def to_checksum_address(raw: Bytecode) -> str:
    """Mixed-case checksum encoding of a 20-byte address."""
    hex_addr = _address(raw).hex()
    digest = keccak256(hex_addr.encode()).hex()
    return "0x" + "".join(c.upper() if int(d, 16) >= 8 else c for c, d in zip(hex_addr, digest))
