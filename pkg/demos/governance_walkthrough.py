"""Walk through the three governance-contract checks on the fixture chain.

    python demos/governance_walkthrough.py
"""

from __future__ import annotations

from importlib import resources

from _fixtures import addresses, replay

from govaudit.governance import (
    assess_mutability,
    build_creation_chain,
    check_soundness,
    detect_privileged_functions,
    load_platform_deployers,
)
from govaudit.similarity import load_templates


def main() -> None:
    provider = replay()
    a = addresses()
    data = resources.files("govaudit.data")
    with resources.as_file(data / "templates.jsonl") as path:
        templates = load_templates(path)
    with resources.as_file(data / "platforms.json") as path:
        deployers = load_platform_deployers(path, 1)

    print("1. Is the contract a governance contract at all?")
    for name in ("platformdao", "lookalike", "toygov", "minidao"):
        v = check_soundness(a[name], provider, templates, deployers)
        print(f"   {name:12} sound={v.sound!s:5} evidence={v.evidence}")

    print("\n2. Who may call the privileged functions?")
    code = provider.get_code(a["minidao"])
    for f in detect_privileged_functions(code, a["minidao"], provider):
        print(f"   0x{f.selector.hex()} gated on {f.comparand_source} -> {f.resolved_address} ({f.controller})")
    print("   The developer account, not the DAO, controls these functions.")

    print("\n3. Can the code behind the address change?")
    for name in ("metamorphic", "minidao"):
        chain = build_creation_chain(a[name], provider)
        verdict = assess_mutability(chain, provider)
        kinds = " <- ".join(s.kind for s in chain.steps)
        print(f"   {name:12} chain {kinds} <- EOA  mutable={verdict.mutable} pivot={verdict.pivot_index}")


if __name__ == "__main__":
    main()
