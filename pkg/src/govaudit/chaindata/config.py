from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

MODES = ("live", "record", "replay")


class ConfigurationError(ValueError):
    """Provider settings are missing or inconsistent."""


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    backoff: float = 0.5  # seconds, doubled after every failed attempt


@dataclass(frozen=True)
class ProviderConfig:
    rpc_endpoint: str | None = None
    scanner_endpoint: str | None = None
    scanner_key: str | None = None
    signature_db_endpoint: str | None = None
    mode: str = "live"
    cache_dir: Path | None = None
    chain_id: int = 1
    max_in_flight: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_in_flight < 1:
            raise ConfigurationError("max_in_flight must be positive")
        if self.mode in ("record", "replay") and self.cache_dir is None:
            raise ConfigurationError(f"{self.mode} mode needs a cache directory")

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None, **overrides) -> ProviderConfig:
        """Build from ``GOVAUDIT_*`` variables; explicit ``overrides`` win."""
        env = os.environ if env is None else env
        values = {
            "rpc_endpoint": env.get("GOVAUDIT_RPC_URL"),
            "scanner_endpoint": env.get("GOVAUDIT_SCANNER_URL"),
            "scanner_key": env.get("GOVAUDIT_SCANNER_KEY"),
            "signature_db_endpoint": env.get("GOVAUDIT_SIG_DB_URL"),
            "mode": env.get("GOVAUDIT_MODE", "live"),
            "cache_dir": Path(env["GOVAUDIT_CACHE_DIR"]) if env.get("GOVAUDIT_CACHE_DIR") else None,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values.get("cache_dir") is not None:
            values["cache_dir"] = Path(values["cache_dir"])
        return cls(**values)
