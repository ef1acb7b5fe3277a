from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from govaudit.chaindata import ChainDataError
from govaudit.evm.disasm import assemble
from govaudit.governance import (
    EXTERNAL,
    SELF_GOVERNED,
    UNRESOLVED,
    CreationChain,
    CreationStep,
    IntegrityError,
    assess_mutability,
    build_creation_chain,
    check_soundness,
    detect_privileged_functions,
    load_platform_deployers,
    self_destruct_reasons,
)
from govaudit.governance.chain import DELEGATECALL_REASON, DESTROYED_REASON, MAX_CHAIN_LENGTH, SELFDESTRUCT_REASON
from govaudit.governance.soundness import BYTECODE, CREATOR, FUNCTIONS, OPEN_SOURCE
from govaudit.similarity import load_templates
from support import FakeChain, addr, addresses, asm, compiled, compiled_records, live_world

DATA = Path(__file__).parent.parent / "src" / "govaudit" / "data"
GOV = addr(0xDA00)
ADMIN = "0x" + "ab" * 20
PACKED = "0x" + "cd" * 20
GUARDIAN = "0x" + "00" * 17 + "0a11ce"
STORAGE = {
    (GOV, 0): bytes(12) + bytes.fromhex(ADMIN[2:]),
    (GOV, 2): ((int(PACKED, 16) << 64) | 0x1234).to_bytes(32, "big"),
}

DESTRUCTIBLE = assemble("CALLER SELFDESTRUCT")
PROXY = assemble("GAS PUSH1 0x00 DUP1 DUP1 DUP1 PUSH20 0x1111111111111111111111111111111111111111 DELEGATECALL STOP")
PLAIN = assemble("PUSH1 0x01 PUSH1 0x00 SSTORE STOP")


def state():
    return FakeChain({}, STORAGE)


def summary(findings):
    return [(f.selector.hex(), f.comparand_source, f.controller) for f in findings]


# ------------------------------------------------------------------ privileged functions


def test_mini_dao_external_controllers():
    found = detect_privileged_functions(asm("mini_dao"), GOV, state())
    assert summary(found) == [
        ("ea0217cf", "storageSlot", EXTERNAL),
        ("ece40cc1", "storageSlot", EXTERNAL),
    ]
    assert {f.resolved_address for f in found} == {ADMIN}
    assert all(f.slot == 0 and f.slot_offset == 0 for f in found)


def test_only_governance_is_self_governed():
    found = detect_privileged_functions(asm("only_governance"), GOV, state())
    assert summary(found) == [
        ("70b0f660", "selfAddress", SELF_GOVERNED),
        ("ea0217cf", "selfAddress", SELF_GOVERNED),
    ]


def test_packed_address_in_slot():
    found = detect_privileged_functions(asm("packed_owner"), GOV, state())
    assert [f.selector.hex() for f in found] == ["13af4035", "2e1a7d4d"]
    for f in found:
        assert (f.controller, f.slot, f.slot_offset, f.resolved_address) == (EXTERNAL, 2, 8, PACKED)


def test_immediate_address():
    (f,) = detect_privileged_functions(asm("guardian_immediate"), GOV, state())
    assert (f.comparand_source, f.controller, f.resolved_address) == ("push20Immediate", EXTERNAL, GUARDIAN)


def test_immediate_equal_to_governance_is_self_governed():
    code = asm("guardian_immediate").replace(bytes.fromhex(GUARDIAN[2:]), bytes.fromhex(GOV[2:]))
    (f,) = detect_privileged_functions(code, GOV, state())
    assert f.controller == SELF_GOVERNED


def test_storage_equal_to_governance_is_self_governed():
    chain = FakeChain({}, {(GOV, 0): bytes(12) + bytes.fromhex(GOV[2:])})
    assert {f.controller for f in detect_privileged_functions(asm("mini_dao"), GOV, chain)} == {SELF_GOVERNED}


def test_without_state_storage_stays_unresolved():
    found = detect_privileged_functions(asm("mini_dao"), GOV)
    assert {f.controller for f in found} == {UNRESOLVED}
    assert all(f.resolved_address is None for f in found)


@pytest.mark.parametrize("name", ["benign_mapping", "benign_value_check", "benign_caller_order"])
def test_benign_assembly_has_no_findings(name):
    assert detect_privileged_functions(asm(name), GOV, state()) == []


BENIGN = [(r["name"], r["compilerVersion"], r["optimize"]) for r in compiled_records()
          if r["name"] in ("Ballot", "MiniToken", "Store", "Ping", "ToyGovernor", "Factory")]


@pytest.mark.parametrize("name,version,optimize", BENIGN, ids=lambda v: str(v)[:8])
def test_benign_compiled_has_no_findings(name, version, optimize):
    assert detect_privileged_functions(compiled(name, version, optimize), GOV, state()) == []


@pytest.mark.parametrize("rec", [r for r in compiled_records() if r["name"] in ("MiniDao", "SelfGoverned")],
                         ids=lambda r: f"{r['name']}-{r['compilerVersion'][:6]}-{r['optimize']}")
def test_compiled_governance_contracts(rec):
    code = bytes.fromhex(rec["runtimeBytecodeHex"][2:])
    found = detect_privileged_functions(code, GOV, state())
    if rec["name"] == "MiniDao":
        assert summary(found) == [("ea0217cf", "storageSlot", EXTERNAL), ("ece40cc1", "storageSlot", EXTERNAL)]
    else:
        assert summary(found) == [("70b0f660", "selfAddress", SELF_GOVERNED), ("ea0217cf", "selfAddress", SELF_GOVERNED)]


def test_finding_json_form():
    (f, _) = detect_privileged_functions(asm("packed_owner"), GOV, state())
    d = f.to_dict()
    assert d["selector"] == "0x13af4035" and d["slot"] == "0x2" and d["slotOffset"] == 8


@given(st.binary(max_size=200))
def test_arbitrary_code_never_crashes(code):
    for f in detect_privileged_functions(code, GOV, state()):
        assert f.controller in (EXTERNAL, SELF_GOVERNED, UNRESOLVED)


# ------------------------------------------------------------------ creation chains


def chain_of(kinds, codes, eoa=addr(0xE0A)):
    """Accounts for a chain addr(1) <- addr(2) <- ... <- eoa with the given kinds and codes."""
    accounts = {}
    for i, (kind, code) in enumerate(zip(kinds, codes), start=1):
        creator = addr(i + 1) if i < len(kinds) else eoa
        accounts[addr(i)] = {"code": code, "creator": creator, "kind": kind}
    return FakeChain(accounts)


def test_chain_walks_to_the_eoa():
    fake = chain_of(["CREATE", "CREATE2", "CREATE"], [PLAIN, PLAIN, PLAIN])
    chain = build_creation_chain(addr(1), fake)
    assert [s.created for s in chain.steps] == [addr(1), addr(2), addr(3)]
    assert chain.terminal_eoa == addr(0xE0A)
    assert chain.to_dict()["steps"][1]["creationKind"] == "CREATE2"


def test_chain_cycle_is_an_integrity_error():
    fake = FakeChain({addr(1): {"code": PLAIN, "creator": addr(2)}, addr(2): {"code": PLAIN, "creator": addr(1)}})
    with pytest.raises(IntegrityError):
        build_creation_chain(addr(1), fake)


def test_chain_length_is_bounded():
    n = MAX_CHAIN_LENGTH + 1
    fake = chain_of(["CREATE"] * n, [PLAIN] * n)
    with pytest.raises(IntegrityError):
        build_creation_chain(addr(1), fake)


def test_contract_without_creation_record():
    fake = FakeChain({addr(1): {"code": PLAIN, "creator": addr(2)}, addr(2): {"code": PLAIN}})
    with pytest.raises(ChainDataError, match="no creation record"):
        build_creation_chain(addr(1), fake)
    with pytest.raises(ChainDataError):
        build_creation_chain(addr(9), fake)


def test_self_destruct_reasons():
    assert self_destruct_reasons(DESTRUCTIBLE) == (SELFDESTRUCT_REASON,)
    assert self_destruct_reasons(PROXY) == (DELEGATECALL_REASON,)
    assert self_destruct_reasons(PLAIN) == ()
    # unreachable code still counts
    assert self_destruct_reasons(assemble("STOP SELFDESTRUCT")) == (SELFDESTRUCT_REASON,)


def test_create2_behind_destructible_prefix_is_mutable():
    fake = chain_of(["CREATE", "CREATE2", "CREATE"], [DESTRUCTIBLE, PROXY, PLAIN])
    v = assess_mutability(build_creation_chain(addr(1), fake), fake)
    assert v.mutable and v.pivot_index == 1
    assert v.destructibility == (True, True, False)


def test_create_only_chain_is_immutable():
    fake = chain_of(["CREATE", "CREATE"], [DESTRUCTIBLE, DESTRUCTIBLE])
    v = assess_mutability(build_creation_chain(addr(1), fake), fake)
    assert not v.mutable and v.pivot_index is None


def test_non_destructible_step_blocks_mutability():
    fake = chain_of(["CREATE", "CREATE2"], [PLAIN, DESTRUCTIBLE])
    assert not assess_mutability(build_creation_chain(addr(1), fake), fake).mutable


def test_destroyed_contract_counts_as_destructible():
    fake = chain_of(["CREATE2"], [b""])
    v = assess_mutability(build_creation_chain(addr(1), fake), fake)
    assert v.mutable and v.reasons == ((DESTROYED_REASON,),)


def test_pivot_may_be_excluded():
    fake = chain_of(["CREATE2", "CREATE"], [PLAIN, PLAIN])
    chain = build_creation_chain(addr(1), fake)
    assert not assess_mutability(chain, fake).mutable
    v = assess_mutability(chain, fake, include_pivot=False)
    assert v.mutable and v.pivot_index == 0


def test_confidence_is_weakest_source():
    fake = chain_of(["CREATE2"], [DESTRUCTIBLE])
    fake.accounts[addr(1)]["source"] = "record"
    assert assess_mutability(build_creation_chain(addr(1), fake), fake).confidence == "record"


kinds = st.lists(st.sampled_from(["CREATE", "CREATE2"]), min_size=1, max_size=8)


@given(kinds, st.data())
def test_mutability_matches_its_definition(ks, data):
    destructible = data.draw(st.lists(st.booleans(), min_size=len(ks), max_size=len(ks)))
    fake = chain_of(ks, [DESTRUCTIBLE if d else PLAIN for d in destructible])
    v = assess_mutability(build_creation_chain(addr(1), fake), fake)
    expected = any(k == "CREATE2" and all(destructible[: i + 1]) for i, k in enumerate(ks))
    assert v.mutable == expected
    if "CREATE2" not in ks:
        assert not v.mutable
    if v.mutable:
        assert ks[v.pivot_index] == "CREATE2"


def test_world_fixture_chains():
    p = live_world()
    a = addresses()
    tornado = assess_mutability(build_creation_chain(a["tornado-proposal"], p), p)
    assert tornado.mutable and tornado.pivot_index == 1
    for name in ("create2-immutable", "minidao", "platformdao"):
        assert not assess_mutability(build_creation_chain(a[name], p), p).mutable


def test_empty_chain_verdict():
    v = assess_mutability(CreationChain((), addr(1)), FakeChain({}))
    assert not v.mutable and v.confidence == "trace"
    assert CreationStep(addr(1), addr(2), "CREATE", "0x").to_dict()["kindSource"] == "record"


# ------------------------------------------------------------------ soundness


@pytest.fixture(scope="module")
def templates():
    return load_templates(DATA)


def test_platform_deployers_filter_by_chain(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"platforms": [{"platform": "a", "chainId": 1, "deployers": ["0x' + "AA" * 20 + '"]},'
                    '{"platform": "b", "chainId": 5, "deployers": ["0x' + "bb" * 20 + '"]}]}')
    assert load_platform_deployers(path, 1) == {"0x" + "aa" * 20: "a"}
    assert len(load_platform_deployers(path)) == 2


def test_soundness_paths_on_world(templates):
    p = live_world()
    a = addresses()
    deployers = load_platform_deployers(DATA / "platforms.json", 1)
    assert check_soundness(a["platformdao"], p, templates, deployers).evidence == CREATOR
    assert check_soundness(a["lookalike"], p, templates, deployers).evidence == BYTECODE
    assert check_soundness(a["toygov"], p, templates, deployers).evidence == FUNCTIONS
    unsound = check_soundness(a["minidao"], p, templates, deployers)
    assert not unsound.sound and unsound.evidence is None


def test_documented_open_source_needs_verification(templates):
    fake = FakeChain({GOV: {"code": compiled("MiniDao"), "creator": addr(0xE0A)}})
    assert not check_soundness(GOV, fake, templates, (), [GOV]).sound
    fake.verified = {GOV}
    assert check_soundness(GOV, fake, templates, (), [GOV]).evidence == OPEN_SOURCE
    assert not check_soundness(GOV, fake, templates, ()).sound


def test_paths_stop_at_first_success(templates):
    fake = FakeChain({GOV: {"code": compiled("MiniDao"), "creator": addr(0xF)}})
    v = check_soundness(GOV, fake, templates, [addr(0xF)])
    assert v.evidence == CREATOR
    assert ("code", GOV) not in fake.calls


def test_provider_errors_propagate(templates):
    class Broken(FakeChain):
        def get_code(self, address):
            raise ChainDataError("down")

    with pytest.raises(ChainDataError):
        check_soundness(GOV, Broken({GOV: {"creator": addr(2)}}), templates, ())
