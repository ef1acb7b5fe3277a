from __future__ import annotations

from Crypto.Hash import keccak


def keccak256(data: bytes) -> bytes:
    return keccak.new(digest_bits=256, data=bytes(data)).digest()


def compute_selector(signature: str) -> bytes:
    """First four bytes of the keccak digest of a canonical signature."""
    return keccak256(signature.encode())[:4]
