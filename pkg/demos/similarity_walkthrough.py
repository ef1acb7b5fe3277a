"""Opcode n-gram similarity across compiler versions.

    python demos/similarity_walkthrough.py
"""

from __future__ import annotations

import json

from _fixtures import FIXTURES

from govaudit.similarity import contracts_similar


def load() -> dict[tuple[str, str, bool], bytes]:
    out = {}
    for line in (FIXTURES / "compiled.jsonl").read_text().splitlines():
        r = json.loads(line)
        out[(r["name"], r["compilerVersion"].split("+")[0], r["optimize"])] = bytes.fromhex(r["runtimeBytecodeHex"][2:])
    return out


def main() -> None:
    codes = load()
    base = codes[("MiniToken", "0.6.12", False)]
    print("MiniToken 0.6.12 (no optimizer) against:")
    for key in [("MiniToken", "0.7.6", False), ("MiniToken", "0.6.12", True), ("Ballot", "0.6.12", False)]:
        d = contracts_similar(base, codes[key])
        print(f"  {key[0]:10} {key[1]:7} opt={key[2]!s:5} score={d.score:.4f} similar={d.similar}")
    d = contracts_similar(base, codes[("MiniToken", "0.7.6", False)], threshold=0.9)
    print(f"\nWith threshold 0.9 the 0.7.6 build is similar={d.similar}.")


if __name__ == "__main__":
    main()
