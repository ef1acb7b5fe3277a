"""Regenerate the chain-state fixtures under tests/fixtures and their replay cache.

Writes:
  tests/fixtures/world.json           accounts, creation records, traces, signature DB
  tests/fixtures/incidents.json       13 proposals modelled on known governance attacks
  tests/fixtures/proposals/*.json     small definitional proposals
  tests/fixtures/docs/*.jsonl         scripted LLM answers for the documentation fixtures
  tests/fixtures/cache/               replay cache recorded from every workload below

Addresses of contracts deployed by plain accounts are real CREATE addresses of
their creator and nonce, so creation records and address math agree.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from govaudit.abi import encode_call  # noqa: E402
from govaudit.cli import main  # noqa: E402
from govaudit.evm.hashing import keccak256  # noqa: E402
from govaudit.governance.addresses import compute_create2_address, compute_create_address  # noqa: E402

FIX = ROOT / "tests/fixtures"
PLATFORM_DEPLOYER = "0x00000000000000000000000000000000000f4c70"
# EIP-1167 minimal proxy runtime; the 20-byte implementation is spliced in
MINIMAL_PROXY = "363d3d373d3d3d363d73{}5af43d82803e903d91602b57fd5bf3"


def compiled(name: str, version: str = "0.8.26", optimize: bool = True) -> str:
    for line in (FIX / "compiled.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if rec["name"] == name and rec["compilerVersion"].startswith(version) and rec["optimize"] == optimize:
            return rec["runtimeBytecodeHex"]
    raise KeyError((name, version, optimize))


def eoa(label: str) -> str:
    return "0x" + keccak256(b"eoa:" + label.encode())[12:].hex()


def tx(label: str) -> str:
    return "0x" + keccak256(b"tx:" + label.encode()).hex()


def word(addr: str) -> str:
    return "0x" + addr[2:].rjust(64, "0")


class World:
    def __init__(self) -> None:
        self.accounts: dict[str, dict] = {}
        self.traces: dict[str, list[str]] = {}
        self.nonces: dict[str, int] = {}
        self.signatures: dict[str, list[str]] = {}

    def deploy(self, label: str, creator: str, code: str, kind: str = "CREATE", *, address: str | None = None, **meta) -> str:
        if address is None:
            nonce = self.nonces.get(creator, 0)
            self.nonces[creator] = nonce + 1
            address = "0x" + compute_create_address(creator, nonce).hex()
        txh = tx(label)
        self.accounts[address] = {
            "label": label,
            "code": code,
            "creation": {"creator": creator, "txHash": txh},
            **meta,
        }
        if creator in self.accounts:
            self.traces[txh] = ["PUSH1", "MSTORE", kind, "POP", "STOP"]
        else:
            self.traces[txh] = ["PUSH1", "MSTORE", "CODECOPY", "RETURN"]
        return address

    def to_json(self) -> dict:
        return {
            "chainId": 1,
            "tracing": True,
            "accounts": self.accounts,
            "traces": self.traces,
            "signatures": self.signatures,
        }


def abi_fn(signature: str) -> dict:
    name, _, rest = signature.partition("(")
    types = [t for t in rest[:-1].split(",") if t]
    return {"type": "function", "name": name, "inputs": [{"name": f"a{i}", "type": t} for i, t in enumerate(types)]}


def build_world() -> tuple[World, dict[str, str]]:
    w = World()
    a: dict[str, str] = {}
    dev = eoa("developer")
    a["developer"] = dev

    # governance contracts
    a["minidao"] = w.deploy("minidao", dev, compiled("MiniDao"), verified=True, contractName="MiniDao",
                            storage={"0x0": word(dev), "0x1": word("0x64")})
    a["selfgov"] = w.deploy("selfgov", dev, compiled("SelfGoverned"), verified=True, contractName="SelfGoverned")
    a["toygov"] = w.deploy("toygov", dev, compiled("ToyGovernor", "0.6.12", False),
                           verified=True, contractName="ToyGovernor", nameTag="Toy Governor")
    # the platform deployer is a factory contract at a fixed address
    w.deploy("platform-deployer", eoa("platform-team"), compiled("Ping"), address=PLATFORM_DEPLOYER)
    a["platformdao"] = w.deploy("platformdao", PLATFORM_DEPLOYER, compiled("PlatformDao"),
                                verified=True, contractName="PlatformDao")
    a["lookalike"] = w.deploy("lookalike", eoa("copycat"), compiled("PlatformDao", "0.7.6"))

    # metamorphic governance: a Child created by CREATE2 from a Factory
    factory = w.deploy("child-factory", dev, compiled("Factory"))
    init = bytes.fromhex("6080")  # stand-in init code; only the address math depends on it
    child = "0x" + compute_create2_address(factory, b"\0" * 32, init).hex()
    a["metamorphic"] = w.deploy("metamorphic", factory, compiled("Child"), "CREATE2", address=child,
                                storage={"0x0": word(dev)})

    # Tornado pattern: proposal P <-CREATE- deployer D <-CREATE2- factory F <- EOA.
    # D is a minimal proxy (DELEGATECALL), P can SELFDESTRUCT.
    attacker = eoa("tornado-attacker")
    f = w.deploy("tornado-factory", attacker, compiled("Factory"))
    impl = w.deploy("tornado-impl", attacker, compiled("Factory", "0.7.6"))
    d_code = "0x" + MINIMAL_PROXY.format(impl[2:])
    d = "0x" + compute_create2_address(f, keccak256(b"salt"), bytes.fromhex(d_code[2:])).hex()
    d = w.deploy("tornado-deployer", f, d_code, "CREATE2", address=d)
    a["tornado-proposal"] = w.deploy("tornado-proposal", d, compiled("Child"),
                                     verified=True, contractName="Proposal20",
                                     abi=[abi_fn("executeProposal()")])

    # immutable counterparts for the mutability checks
    safe_factory = w.deploy("safe-factory", dev, compiled("Store"))
    safe_child = "0x" + compute_create2_address(safe_factory, b"\1" * 32, init).hex()
    a["create2-immutable"] = w.deploy("create2-immutable", safe_factory, compiled("Ballot"), "CREATE2",
                                      address=safe_child)

    # proposal targets
    team = eoa("protocol-team")
    a["tsd"] = w.deploy("tsd-dao", team, compiled("Store", "0.6.12"), verified=True, contractName="TSDImplementation",
                        abi=[abi_fn("upgradeTo(address)")])
    a["yuan"] = w.deploy("yuan-reserves", team, compiled("Store", "0.7.6"), verified=True, contractName="YuanReserves",
                         abi=[abi_fn("upgradeTo(address)"), abi_fn("setReserve(address)")])
    a["venus"] = w.deploy("venus-comptroller", team, compiled("Store", "0.5.17"), verified=True,
                          contractName="Comptroller", nameTag="Venus: Comptroller",
                          abi=[abi_fn("_setCollateralFactor(address,uint256)")])
    a["build"] = w.deploy("build-token", team, compiled("MiniToken", "0.7.6"), symbol="BUILD", decimals=18)
    a["audius"] = w.deploy("audius-governance", team, compiled("Store"), verified=True, contractName="Governance",
                           abi=[abi_fn("evaluateProposalOutcome(uint256)")])
    a["swerve"] = w.deploy("swerve-pool", team, compiled("Store", "0.5.17", False), nameTag="Swerve: swUSD Pool")
    a["atlantis"] = w.deploy("atlantis-unitroller", team, compiled("Store", "0.6.12", False), nameTag="Atlantis: Unitroller")
    a["indexed"] = w.deploy("indexed-controller", team, compiled("Store", "0.7.6", False), verified=True,
                            contractName="MarketCapSqrtController", abi=[abi_fn("reindexPool(address)")])
    a["yam"] = w.deploy("yam-token", team, compiled("MiniToken"), verified=True, contractName="YAMDelegator",
                        symbol="YAM", decimals=18, abi=[abi_fn("_setPendingGov(address)"), abi_fn("transfer(address,uint256)")])
    a["beanstalk"] = w.deploy("beanstalk", team, compiled("Store", "0.8.26", False), nameTag="Beanstalk: Protocol")
    a["bigcap"] = w.deploy("bigcap-token", team, compiled("MiniToken", "0.6.12"), symbol="BIGCAP", decimals=18)
    a["fortress-oracle"] = w.deploy("fortress-oracle", team, compiled("Store", "0.6.12"), verified=True,
                                    contractName="FortressPriceOracle",
                                    abi=[abi_fn("setPrice(address,uint256)")])
    a["fts"] = w.deploy("fts-token", team, compiled("MiniToken", "0.5.17"), symbol="FTS", decimals=18)
    a["arena"] = w.deploy("arena-token", team, compiled("MiniToken", "0.8.26", False), verified=True,
                          contractName="ArenaToken", symbol="ARENA", decimals=18,
                          abi=[abi_fn("transfer(address,uint256)")])
    a["timelock"] = w.deploy("timelock", team, compiled("Store", "0.8.26", False), verified=True,
                             contractName="Timelock", nameTag="Timelock",
                             abi=[abi_fn("upgradeTo(address)"), abi_fn("setDelay(uint256)")])
    a["grants"] = eoa("grants-multisig")
    w.accounts[a["grants"]] = {"label": "grants-multisig", "nameTag": "Grants Multisig"}
    a["attacker"] = eoa("attacker")
    a["new-impl"] = eoa("new-implementation")
    w.signatures["0x3659cfe6"] = ["upgradeTo(address)"]
    return w, a


def incidents(a: dict[str, str]) -> list[dict]:
    gov = a["toygov"]

    def call(target, signature, values=(), value=0):
        data = encode_call(signature, list(values))[4:] if "(" in signature else b""
        return {"target": a[target], "value": value, "signature": signature, "calldata": "0x" + data.hex()}

    def hex_call(target, signature, values):
        data = encode_call(signature, list(values))
        return {"target": a[target], "value": 0, "signature": "0x" + data[:4].hex(), "calldata": "0x" + data.hex()}

    rows = [
        ("true-seigniorage-dollar", "LackOfDescriptionIntention", "",
         [hex_call("tsd", "upgradeTo(address)", [a["attacker"]])]),
        ("yuan", "LackOfDescriptionIntention", "Yuan community proposal.",
         [hex_call("yuan", "setReserve(address)", [a["attacker"]])]),
        ("venus", "LackOfDescriptionIntention", "Venus improvement proposal from the community.",
         [hex_call("venus", "_setCollateralFactor(address,uint256)", [a["attacker"], 6 * 10**17])]),
        ("build-finance", "LackOfDescriptionIntention", "Hello from the Build Finance community!",
         [call("build", "mint(address,uint256)", values=[a["attacker"], 10**24])]),
        ("audius", "LackOfDescriptionIntention", "Proposal 85.",
         [hex_call("audius", "evaluateProposalOutcome(uint256)", [85])]),
        ("swerve", "LackOfDescriptionIntention", "Swerve governance.",
         [call("swerve", "commit_transfer_ownership(address)", values=[a["attacker"]])]),
        ("atlantis", "LackOfDescriptionIntention", "Atlantis Loans proposal.",
         [call("atlantis", "_setPendingImplementation(address)", values=[a["attacker"]])]),
        ("indexed", "LackOfDescriptionIntention", "Index pool maintenance.",
         [hex_call("indexed", "reindexPool(address)", [a["attacker"]])]),
        ("yam", "IncompleteFunction", "Distribute YAM rewards to the incentivizer pool.",
         [hex_call("yam", "_setPendingGov(address)", [a["attacker"]])]),
        ("beanstalk", "IncompleteFunction", "Donate 250,000 USDC to the Ukraine Crypto Donation wallet.",
         [call("beanstalk", "emergencyCommit(uint32)", values=[18])]),
        ("bigcap", "IncompleteFunction", "Transfer 1,000 BIGCAP to the community treasury.",
         [hex_call("bigcap", "upgradeTo(address)", [a["attacker"]])]),
        ("fortress", "IncompleteParameter", "Set the FTS price in the price oracle.",
         [hex_call("fortress-oracle", "setPrice(address,uint256)", [a["fts"], 4 * 10**24])]),
        ("tornado-cash", "CodeMutability", "Call executeProposal() to penalize relayers that cheat.",
         [call("tornado-proposal", "executeProposal()")]),
    ]
    return [
        {"id": name, "governance": gov, "description": desc, "calls": calls,
         "meta": {"incident": name, "expected": expected}}
        for name, expected, desc, calls in rows
    ]


def definitional(a: dict[str, str]) -> dict[str, dict]:
    gov = a["toygov"]
    transfer = encode_call("transfer(address,uint256)", [a["grants"], 500 * 10**18])
    upgrade = encode_call("upgradeTo(address)", [a["new-impl"]])
    delay = encode_call("setDelay(uint256)", [172800])
    return {
        "normal": {
            "id": "normal", "governance": gov,
            "description": "# Grants\n\nTransfer 500 ARENA to the Grants Multisig.",
            "calls": [{"target": a["arena"], "signature": "0xa9059cbb", "calldata": "0x" + transfer.hex()}],
        },
        "empty_description": {
            "id": "empty-description", "governance": gov, "description": "",
            "calls": [{"target": a["arena"], "signature": "0xa9059cbb", "calldata": "0x" + transfer.hex()}],
        },
        "description_only": {
            "id": "description-only", "governance": gov,
            "description": "Transfer 500 ARENA to the Grants Multisig.", "calls": [],
        },
        "negative": {
            "id": "negative", "governance": gov,
            "description": "Set the Timelock delay to 172800 seconds. Do not upgrade the Timelock.",
            "calls": [
                {"target": a["timelock"], "signature": "0x" + delay[:4].hex(), "calldata": "0x" + delay.hex()},
                {"target": a["timelock"], "signature": "0x" + upgrade[:4].hex(), "calldata": "0x" + upgrade.hex()},
            ],
        },
        "excluded": {
            "id": "excluded", "governance": gov, "description": "", "descriptionSupported": False,
            "calls": [{"target": a["arena"], "signature": "0xa9059cbb", "calldata": "0x" + transfer.hex()}],
        },
    }


CAST_VOTE = "Call castVote with the proposal id and 0 (against), 1 (for) or 2 (abstain)."
# node -> (verdict, reason, does the document really say it)
HARBOR_ANSWERS = {
    "governance": ("Yes", "Harbor is governed by HBR holders through the on-chain Harbor Governor contract.", True),
    "membership": ("Yes", "Anyone who holds HBR is a member of the Harbor DAO.", True),
    "participation": ("Yes", "Members take part in governance by creating proposals, by voting, and by "
                             "delegating their votes to another address.", True),
    "exit": ("No", "The document does not say how membership ends.", None),
    "voting": ("Yes", CAST_VOTE, True),
    "powerCalculation": ("Yes", "Each HBR token carries one vote.", True),
    "powerDistribution": ("Yes", "Power is distributed in proportion to token holdings, and a holder can move "
                                 "all of their power to a delegate at any time.", True),
    "minority": ("No", "", None),
    "proposing": ("Yes", "Any address with at least 25,000 delegated HBR can submit a proposal.", True),
    "proposalSteps": ("Yes", "Call propose on the Harbor Governor with those calls and the description.", True),
    "voteSteps": ("Yes", CAST_VOTE, True),
    # a made-up answer that cross-verification has to reject
    "guardian": ("Yes", "The Harbor security multisig can cancel any queued proposal.", False),
}


def llm_scripts() -> dict[str, list[dict]]:
    questions = json.loads((ROOT / "src/govaudit/data/questions.json").read_text())["nodes"]
    harbor = []
    for node, (verdict, reason, holds) in HARBOR_ANSWERS.items():
        harbor.append({"matchSubstring": f"Question: {questions[node]['question']}",
                       "responseText": f"Result: {verdict}\nReason: {reason}"})
        if verdict == "Yes":
            harbor.append({"matchSubstring": f"Sentence: {reason}",
                           "responseText": f"Result: {'Yes' if holds else 'No'}"})
    all_yes = [{"matchSubstring": "Result: Yes/No", "repeat": True,
                "responseText": "Result: Yes\nReason: The document covers this."}]
    return {"harbor": harbor, "all_yes": all_yes}


def dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def workloads(a: dict[str, str]) -> list[list[str]]:
    gov = [["governance", a[k]] for k in
           ("minidao", "selfgov", "toygov", "platformdao", "lookalike", "metamorphic")]
    props = [["proposal", "tests/fixtures/incidents.json"]]
    props += [["proposal", f"tests/fixtures/proposals/{n}.json"] for n in sorted(definitional(a))]
    return gov + props


def main_() -> None:
    w, a = build_world()
    dump(FIX / "world.json", w.to_json())
    dump(FIX / "addresses.json", a)
    dump(FIX / "incidents.json", incidents(a))
    for name, prop in definitional(a).items():
        dump(FIX / "proposals" / f"{name}.json", prop)
    for name, records in llm_scripts().items():
        (FIX / "docs" / f"{name}.jsonl").write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))
    jobs = workloads(a)
    dump(FIX / "workloads.json", jobs)

    cache = FIX / "cache"
    shutil.rmtree(cache, ignore_errors=True)
    import io

    for argv in jobs:
        out = io.StringIO()
        code = main([*argv, "--world", str(FIX / "world.json"), "--mode", "record", "--cache-dir", str(cache), "--json"],
                    env={}, stdout=out)
        status = json.loads(out.getvalue())["status"] if out.getvalue() else "?"
        print(f"{code} {status:10} {' '.join(argv)}")
    print(f"recorded {len(list(cache.glob('*.json')))} cache entries")


if __name__ == "__main__":
    main_()
