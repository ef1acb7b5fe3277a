from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from govaudit.cli import main
from govaudit.report import EXIT_CLEAN, EXIT_FINDINGS, EXIT_INCOMPLETE, EXIT_INPUT, EXIT_USAGE, AuditReport
from support import CACHE, FIXTURES, addresses, compiled

ROOT = Path(__file__).parent.parent
REPLAY = {"GOVAUDIT_MODE": "replay", "GOVAUDIT_CACHE_DIR": str(CACHE)}


def run(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), env=REPLAY if env is None else env, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv, env=None):
    code, out, err = run(*argv, "--json", env=env)
    return code, json.loads(out)


def check_schema(report: dict) -> None:
    assert report["schemaVersion"] == "1.0"
    assert set(report) == {"schemaVersion", "subject", "provenanceMode", "status", "verdicts", "findings", "diagnostics"}
    assert report["subject"]["kind"] in ("governance", "proposal", "documentation", "similarity")
    assert report["provenanceMode"] in ("live", "replay")
    for d in report["diagnostics"]:
        assert d["severity"] in ("info", "warning", "error")


# ------------------------------------------------------------------ governance


def test_mini_dao_has_external_controller():
    code, report = run_json("governance", addresses()["minidao"])
    check_schema(report)
    assert code == EXIT_FINDINGS and report["provenanceMode"] == "replay"
    cats = [f["category"] for f in report["findings"]]
    assert cats.count("PrivilegedExternal") == 2 and "Unsound" in cats
    assert not report["verdicts"]["mutability"]["mutable"]


def test_platform_template_with_create_only_chain_is_clean():
    code, report = run_json("governance", addresses()["platformdao"])
    assert code == EXIT_CLEAN and report["findings"] == []
    assert report["verdicts"]["soundness"]["evidence"] == "creatorMatchesPlatformDeployer"
    assert {s["creationKind"] for s in report["verdicts"]["creationChain"]["steps"]} == {"CREATE"}


@pytest.mark.parametrize("name,evidence", [("lookalike", "bytecodeMatchesTemplate"), ("toygov", "hasProposeVoteExecute")])
def test_other_soundness_paths(name, evidence):
    code, report = run_json("governance", addresses()[name])
    assert code == EXIT_CLEAN and report["verdicts"]["soundness"]["evidence"] == evidence


def test_metamorphic_contract_is_mutable():
    code, report = run_json("governance", addresses()["metamorphic"])
    assert code == EXIT_FINDINGS
    assert "CodeMutability" in [f["category"] for f in report["findings"]]
    assert report["verdicts"]["mutability"]["pivotIndex"] == 0


def test_replay_miss_is_incomplete(tmp_path):
    code, out, _ = run("governance", addresses()["minidao"], "--cache-dir", str(tmp_path), "--json")
    report = json.loads(out)
    assert code == EXIT_INCOMPLETE and report["status"] == "incomplete"
    assert [d["code"] for d in report["diagnostics"]] == ["replay-miss"]


def test_account_without_code_is_an_input_error():
    code, _, err = run("governance", addresses()["developer"], "--world", str(FIXTURES / "world.json"),
                       "--mode", "live", env={})
    assert code == EXIT_INPUT and "no code" in err


def test_world_file_serves_live_mode():
    code, report = run_json("governance", addresses()["toygov"], "--world", str(FIXTURES / "world.json"),
                            "--mode", "live", env={})
    assert code == EXIT_CLEAN and report["provenanceMode"] == "live"


# ------------------------------------------------------------------ proposals


def test_incident_file():
    code, report = run_json("proposal", str(FIXTURES / "incidents.json"))
    check_schema(report)
    assert code == EXIT_FINDINGS
    assert report["verdicts"]["classification"]["yam"] == "IncompleteFunction"
    assert len(report["verdicts"]["proposals"]) == 13


@pytest.mark.parametrize("name,code,label", [
    ("normal", EXIT_CLEAN, "Normal"),
    ("description_only", EXIT_FINDINGS, "LackOfCodeAction"),
    ("empty_description", EXIT_FINDINGS, "LackOfDescriptionIntention"),
    ("negative", EXIT_FINDINGS, "IncorrectProposal"),
    ("excluded", EXIT_CLEAN, "Excluded"),
])
def test_definitional_proposals(name, code, label):
    got, report = run_json("proposal", str(FIXTURES / "proposals" / f"{name}.json"))
    assert got == code
    assert list(report["verdicts"]["classification"].values()) == [label]


def test_malformed_proposal_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"description": "no id"}')
    assert run("proposal", str(bad))[0] == EXIT_INPUT
    assert run("proposal", str(tmp_path / "missing.json"))[0] == EXIT_INPUT


# ------------------------------------------------------------------ documentation


def test_docs_with_all_yes_script():
    code, report = run_json("docs", str(FIXTURES / "docs" / "harbor.md"),
                            "--llm-script", str(FIXTURES / "docs" / "all_yes.jsonl"))
    check_schema(report)
    assert code == EXIT_CLEAN
    assert [r["satisfied"] for r in report["verdicts"]["rules"]] == [True] * 6


def test_docs_with_harbor_script():
    code, report = run_json("docs", str(FIXTURES / "docs" / "harbor.md"),
                            "--llm-script", str(FIXTURES / "docs" / "harbor.jsonl"))
    assert code == EXIT_FINDINGS
    assert sorted(f["rule"] for f in report["findings"]) == ["AppointmentOfGuardian", "MemberExit", "MinorityProtection"]


def test_docs_without_llm_is_a_usage_error():
    code, _, err = run("docs", str(FIXTURES / "docs" / "harbor.md"), env={})
    assert code == EXIT_USAGE and "GOVAUDIT_LLM_URL" in err


def test_exhausted_script_is_incomplete(tmp_path):
    script = tmp_path / "s.jsonl"
    script.write_text("")
    code, report = run_json("docs", str(FIXTURES / "docs" / "harbor.md"), "--llm-script", str(script))
    assert code == EXIT_INCOMPLETE


# ------------------------------------------------------------------ similarity


def write_code(tmp_path, name, code: bytes, binary=False):
    path = tmp_path / name
    if binary:
        path.write_bytes(code)
    else:
        path.write_text("0x" + code.hex() + "\n")
    return str(path)


def test_identical_files(tmp_path):
    a = write_code(tmp_path, "a.hex", compiled("MiniDao"))
    b = write_code(tmp_path, "b.bin", compiled("MiniDao"), binary=True)
    code, report = run_json("similarity", a, b)
    assert code == EXIT_CLEAN and report["verdicts"]["similarity"]["score"] == 1.0


def test_threshold_override(tmp_path):
    a = write_code(tmp_path, "a.hex", compiled("MiniToken", "0.6.12", False))
    b = write_code(tmp_path, "b.hex", compiled("MiniToken", "0.7.6", False))
    code, report = run_json("similarity", a, b)
    score = report["verdicts"]["similarity"]["score"]
    assert 0.8 <= score < 0.9 and code == EXIT_CLEAN
    code, report = run_json("similarity", a, b, "--threshold", "0.9")
    assert code == EXIT_FINDINGS and not report["verdicts"]["similarity"]["similar"]


def test_missing_bytecode_file(tmp_path):
    assert run("similarity", str(tmp_path / "x"), str(tmp_path / "y"))[0] == EXIT_INPUT


# ------------------------------------------------------------------ usage and rendering


@pytest.mark.parametrize("argv", [[], ["bogus"], ["governance"], ["governance", "0x00", "--mode", "offline"],
                                  ["similarity", "a", "b", "--threshold", "high"]])
def test_usage_errors(argv):
    code, _, err = run(*argv)
    assert code == EXIT_USAGE and "usage" in err


def test_record_mode_needs_cache_dir():
    code, _, err = run("governance", addresses()["minidao"], "--mode", "record", env={})
    assert code == EXIT_USAGE and "configuration" in err


@pytest.mark.parametrize("argv", [
    ["governance", addresses()["minidao"]],
    ["proposal", str(FIXTURES / "incidents.json")],
    ["docs", str(FIXTURES / "docs" / "harbor.md"), "--llm-script", str(FIXTURES / "docs" / "harbor.jsonl")],
])
def test_text_and_json_agree_on_findings(argv):
    code_text, text, _ = run(*argv)
    code_json, report = run_json(*argv)
    assert code_text == code_json
    assert f"findings: {len(report['findings'])}" in text
    assert text.count("\n    - [") == len(report["findings"])


def test_report_rejects_unknown_kind():
    with pytest.raises(ValueError):
        AuditReport("weather", "x", "live")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "govaudit.cli", "--help"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "governance" in proc.stdout


# ------------------------------------------------------------------ committed cache


def test_committed_cache_matches_a_fresh_recording(tmp_path):
    """Re-record every workload from the fixture world; the cache must come out identical."""
    jobs = json.loads((FIXTURES / "workloads.json").read_text())
    fresh = tmp_path / "cache"
    for argv in jobs:
        argv = [str(ROOT / a) if a.startswith("tests/") else a for a in argv]
        code, _, _ = run(*argv, "--world", str(FIXTURES / "world.json"), "--mode", "record",
                         "--cache-dir", str(fresh), env={})
        assert code in (EXIT_CLEAN, EXIT_FINDINGS)
    committed = {p.name: p.read_text() for p in CACHE.glob("*.json")}
    recorded = {p.name: p.read_text() for p in fresh.glob("*.json")}
    assert recorded == committed
    shutil.rmtree(fresh)
