"""Regenerate src/govaudit/data/templates.jsonl from tests/fixtures/compiled.jsonl.

Governor role templates: every ToyGovernor build, with propose/vote/execute
roles.  Platform templates: the optimized PlatformDao builds.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
ROLES = {
    "propose": "propose(address,uint256,bytes,string)",
    "vote": "castVote(uint256,bool)",
    "execute": "execute(uint256)",
}


def main() -> None:
    out = []
    for line in (ROOT / "tests/fixtures/compiled.jsonl").read_text().splitlines():
        rec = json.loads(line)
        version = rec["compilerVersion"].split("+")[0]
        tag = f"{version}{'-opt' if rec['optimize'] else ''}"
        if rec["name"] == "ToyGovernor":
            sels = dict(rec["functionSelectors"])
            sels.update({role: sels[sig] for role, sig in ROLES.items()})
            out.append({
                "name": f"ToyGovernor@{tag}",
                "kind": "governor",
                "compilerVersion": rec["compilerVersion"],
                "runtimeBytecodeHex": rec["runtimeBytecodeHex"],
                "functionSelectors": sels,
            })
        elif rec["name"] == "PlatformDao" and rec["optimize"]:
            out.append({
                "name": f"PlatformDao@{tag}",
                "kind": "platform",
                "platform": "toy-platform",
                "chainId": 1,
                "compilerVersion": rec["compilerVersion"],
                "runtimeBytecodeHex": rec["runtimeBytecodeHex"],
                "functionSelectors": rec["functionSelectors"],
            })
    path = ROOT / "src/govaudit/data/templates.jsonl"
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in out))
    print(f"wrote {len(out)} templates to {path}")


if __name__ == "__main__":
    main()
