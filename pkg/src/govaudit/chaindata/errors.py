from __future__ import annotations


class ChainDataError(Exception):
    """A provider could not produce data; retrying later may succeed."""


class ReplayMissError(ChainDataError):
    """Replay mode was asked for a response that was never recorded."""

    def __init__(self, key: dict, digest: str):
        self.key = key
        self.digest = digest
        super().__init__(f"replay cache miss for {key['method']} {key['params']} (key {digest})")


class CapabilityError(ChainDataError):
    """The configured endpoint does not support the requested method."""


class TransportError(ChainDataError):
    """Network or HTTP-level failure talking to an endpoint."""
