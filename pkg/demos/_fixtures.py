"""Shared paths for the demo scripts; everything runs offline from tests/fixtures."""

from __future__ import annotations

import json
from pathlib import Path

from govaudit.chaindata import ChainData, ProviderConfig

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def addresses() -> dict[str, str]:
    return json.loads((FIXTURES / "addresses.json").read_text())


def replay() -> ChainData:
    """Provider that answers only from the recorded response cache."""
    return ChainData(ProviderConfig(mode="replay", cache_dir=FIXTURES / "cache"))
