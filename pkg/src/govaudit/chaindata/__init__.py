"""Pluggable chain-data providers with a record/replay response cache."""

from govaudit.chaindata.cache import CACHE_VERSION, ResponseCache, cache_key
from govaudit.chaindata.config import ConfigurationError, ProviderConfig, RetryPolicy
from govaudit.chaindata.errors import (
    CapabilityError,
    ChainDataError,
    ReplayMissError,
    TransportError,
)
from govaudit.chaindata.provider import (
    ChainData,
    ContractMetadata,
    CreationRecord,
    normalize_address,
)
from govaudit.chaindata.transport import HttpTransport, Transport

__all__ = [
    "CACHE_VERSION",
    "CapabilityError",
    "ChainData",
    "ChainDataError",
    "ConfigurationError",
    "ContractMetadata",
    "CreationRecord",
    "HttpTransport",
    "ProviderConfig",
    "ReplayMissError",
    "ResponseCache",
    "RetryPolicy",
    "Transport",
    "TransportError",
    "cache_key",
    "normalize_address",
]
