"""``govaudit`` command line.

Exit codes: 0 clean, 1 findings, 2 audit incomplete, 64 usage or
configuration error, 65 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Sequence, TextIO

from govaudit.chaindata import ChainData, ChainDataError, ConfigurationError, ProviderConfig, ReplayMissError
from govaudit.chaindata.provider import normalize_address
from govaudit.chaindata.transport import Transport
from govaudit.chaindata.world import WorldTransport, load_world, world_config
from govaudit.docaudit import AuditIncomplete, HttpLlmClient, LlmError, ScriptedLlm, audit_documentation
from govaudit.evm.disasm import to_bytes
from govaudit.governance import (
    EXTERNAL,
    UNRESOLVED,
    assess_mutability,
    build_creation_chain,
    check_soundness,
    detect_privileged_functions,
    load_platform_deployers,
)
from govaudit.proposal import Matchers, ProposalFormatError, audit_proposal, load_proposals
from govaudit.proposal.consistency import DEFAULT_FUNCTION_THRESHOLD, EXCLUDED
from govaudit.report import EXIT_INPUT, EXIT_USAGE, AuditReport
from govaudit.similarity import DEFAULT_THRESHOLD, contracts_similar, load_templates


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which we reserve
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chain-id", type=int, default=None, help="chain id (default 1)")
    p.add_argument("--mode", choices=("live", "record", "replay"), default=None,
                   help="data mode; defaults to GOVAUDIT_MODE or live")
    p.add_argument("--cache-dir", default=None, help="response cache for record/replay")
    p.add_argument("--json", action="store_true", help="emit one JSON report on stdout")
    p.add_argument("--threshold", type=float, default=None, help="similarity threshold override")
    p.add_argument("--fixtures", default=None,
                   help="directory holding templates.jsonl and platforms.json (default: shipped data)")
    p.add_argument("--world", default=None, help="serve chain data from a world JSON file instead of HTTP")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="govaudit", description="Audit DAO governance contracts, proposals and documentation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("governance", help="soundness, independence and immutability of a governance contract")
    g.add_argument("address")
    g.add_argument("--attested", action="append", default=[],
                   help="address documented as an open-source governance contract (repeatable)")
    _common(g)

    p = sub.add_parser("proposal", help="description/code consistency of proposals in a file")
    p.add_argument("file")
    p.add_argument("--governance", default=None, help="governance contract address (overrides the file)")
    _common(p)

    d = sub.add_parser("docs", help="check documentation against the six rules")
    d.add_argument("file")
    d.add_argument("--llm-script", default=None, help="scripted LLM responses (JSON lines)")
    _common(d)

    s = sub.add_parser("similarity", help="opcode n-gram similarity of two bytecode files")
    s.add_argument("file_a")
    s.add_argument("file_b")
    _common(s)
    return parser


def _mode(args, env) -> str:
    return args.mode or env.get("GOVAUDIT_MODE") or "live"


def _provenance(mode: str) -> str:
    return "replay" if mode == "replay" else "live"


def _provider(args, env, transport: Transport | None) -> ChainData:
    mode = _mode(args, env)
    cache_dir = args.cache_dir or env.get("GOVAUDIT_CACHE_DIR")
    if args.world:
        world = load_world(args.world)
        chain_id = args.chain_id or world.get("chainId", 1)
        config = world_config(mode, cache_dir, chain_id)
        if transport is None and mode != "replay":
            transport = WorldTransport(world)
    else:
        config = ProviderConfig.from_env(env, mode=mode, cache_dir=cache_dir, chain_id=args.chain_id)
    return ChainData(config, None if mode == "replay" else transport)


def _fixture_path(args, name: str):
    if args.fixtures:
        path = Path(args.fixtures) / name
        if not path.exists():
            raise InputError(f"missing fixture file {path}")
        return path
    return resources.files("govaudit.data").joinpath(name)


def _data_error(report: AuditReport, exc: ChainDataError) -> None:
    code = "replay-miss" if isinstance(exc, ReplayMissError) else "data-error"
    report.diagnose("error", code, str(exc))
    report.incomplete = True


# ------------------------------------------------------------------ commands


def cmd_governance(args, env, transport=None) -> AuditReport:
    provider = _provider(args, env, transport)
    report = AuditReport("governance", args.address, _provenance(provider.mode))
    with resources.as_file(_fixture_path(args, "templates.jsonl")) as tpath:
        templates = load_templates(tpath)
    with resources.as_file(_fixture_path(args, "platforms.json")) as ppath:
        deployers = load_platform_deployers(ppath, provider.config.chain_id)
    threshold = args.threshold if args.threshold is not None else DEFAULT_THRESHOLD
    try:
        code = provider.get_code(args.address)
        if not code:
            raise InputError(f"{args.address} has no code")
        sound = check_soundness(args.address, provider, templates, deployers, args.attested, threshold)
        report.verdicts["soundness"] = sound.to_dict()
        if not sound.sound:
            report.findings.append({"category": "Unsound", "explanation": "no soundness evidence path holds"})

        findings = detect_privileged_functions(code, args.address, provider)
        report.verdicts["privilegedFunctions"] = [f.to_dict() for f in findings]
        for f in findings:
            if f.controller in (EXTERNAL, UNRESOLVED):
                report.findings.append({
                    "category": f"Privileged{f.controller}",
                    "explanation": f"function 0x{f.selector.hex()} is gated on caller == "
                                   f"{f.resolved_address or f.comparand_source}",
                })

        chain = build_creation_chain(args.address, provider)
        verdict = assess_mutability(chain, provider)
        report.verdicts["creationChain"] = chain.to_dict()
        report.verdicts["mutability"] = verdict.to_dict()
        if verdict.mutable:
            report.findings.append({
                "category": "CodeMutability",
                "explanation": f"step {verdict.pivot_index} was created by CREATE2 and every step up to it can be destroyed",
            })
        if verdict.confidence != "trace":
            report.diagnose("warning", "reduced-confidence",
                            f"creation kinds taken from {verdict.confidence} data, not traces")
    except ChainDataError as exc:
        _data_error(report, exc)
    return report


def cmd_proposal(args, env, transport=None) -> AuditReport:
    try:
        proposals = load_proposals(args.file)
    except ProposalFormatError as exc:
        raise InputError(str(exc)) from exc
    provider = _provider(args, env, transport)
    report = AuditReport("proposal", args.file, _provenance(provider.mode))
    threshold = args.threshold if args.threshold is not None else DEFAULT_FUNCTION_THRESHOLD
    matchers = Matchers(threshold=threshold, provider=provider)
    audits = []
    for proposal in proposals:
        if args.governance:
            proposal = replace(proposal, governance=normalize_address(args.governance))
        try:
            audit = audit_proposal(proposal, provider, matchers=matchers)
        except ChainDataError as exc:
            _data_error(report, exc)
            continue
        audits.append(audit.to_dict())
        if audit.incomplete:
            report.incomplete = True
            report.diagnose("error", "data-error", f"proposal {proposal.id}: some chain data was unavailable")
        for f in audit.consistency.findings:
            report.findings.append({"proposal": proposal.id, **f.to_dict()})
        for t in audit.targets:
            if t.mutable:
                report.findings.append({
                    "proposal": proposal.id,
                    "category": "CodeMutability",
                    "explanation": f"target {t.target} can be redeployed with different code",
                })
        if audit.classification == EXCLUDED:
            report.diagnose("info", "excluded", f"proposal {proposal.id} has no description by platform design")
    report.verdicts["proposals"] = audits
    report.verdicts["classification"] = {a["proposalId"]: a["classification"] for a in audits}
    return report


def cmd_docs(args, env, transport=None) -> AuditReport:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {args.file}: {exc}") from exc
    if args.llm_script:
        try:
            client = ScriptedLlm.from_jsonl(args.llm_script)
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        mode = "replay"
    else:
        try:
            client = HttpLlmClient.from_env(env)
        except LlmError as exc:
            raise UsageError(f"{exc}; pass --llm-script or set GOVAUDIT_LLM_URL") from exc
        mode = "live"
    report = AuditReport("documentation", args.file, mode)
    try:
        audit = audit_documentation(text, client)
    except AuditIncomplete as exc:
        report.diagnose("error", "llm-unavailable", str(exc))
        report.incomplete = True
        return report
    report.verdicts["rules"] = audit.to_dict()["rules"]
    report.verdicts["chunks"] = audit.chunks
    for r in audit.results:
        if r.incomplete:
            report.incomplete = True
            report.diagnose("error", "llm-unavailable", f"{r.rule_id}: {r.error}")
        elif not r.satisfied:
            report.findings.append({"category": "RuleNotSatisfied", "rule": r.rule_id,
                                    "explanation": f"documentation does not cover {r.rule_id}"})
    return report


def _read_bytecode(path: str) -> bytes:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        text = raw.decode("ascii").strip()
        return to_bytes(text)
    except (UnicodeDecodeError, ValueError):
        return raw


def cmd_similarity(args, env, transport=None) -> AuditReport:
    a = _read_bytecode(args.file_a)
    b = _read_bytecode(args.file_b)
    threshold = args.threshold if args.threshold is not None else DEFAULT_THRESHOLD
    decision = contracts_similar(a, b, threshold)
    report = AuditReport("similarity", f"{args.file_a} {args.file_b}", "live")
    report.verdicts["similarity"] = decision.to_dict()
    if not decision.similar:
        report.findings.append({"category": "NotSimilar",
                                "explanation": f"score {decision.score:.4f} below threshold {threshold}"})
    return report


COMMANDS = {
    "governance": cmd_governance,
    "proposal": cmd_proposal,
    "docs": cmd_docs,
    "similarity": cmd_similarity,
}


def main(
    argv: Sequence[str] | None = None,
    transport: Transport | None = None,
    env: dict[str, str] | None = None,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    env = dict(os.environ) if env is None else env
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = COMMANDS[args.command](args, env, transport)
    except UsageError as exc:
        print(str(exc), file=stderr)
        print(parser.format_usage(), file=stderr, end="")
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=stderr)
        return EXIT_USAGE
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=stderr)
        return EXIT_INPUT
    stdout.write(report.to_json() if args.json else report.render())
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
