"""Audit reports: one structured document per CLI invocation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "1.0"
SUBJECT_KINDS = ("governance", "proposal", "documentation", "similarity")

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_INCOMPLETE = 2
EXIT_USAGE = 64
EXIT_INPUT = 65


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # info | warning | error
    code: str
    message: str

    def to_dict(self) -> dict:
        return {"severity": self.severity, "code": self.code, "message": self.message}


@dataclass
class AuditReport:
    kind: str
    identifier: str
    provenance_mode: str  # live | replay
    verdicts: dict = field(default_factory=dict)
    findings: list[dict] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    incomplete: bool = False

    def __post_init__(self) -> None:
        if self.kind not in SUBJECT_KINDS:
            raise ValueError(f"unknown subject kind {self.kind!r}")

    def diagnose(self, severity: str, code: str, message: str) -> None:
        self.diagnostics.append(Diagnostic(severity, code, message))

    @property
    def exit_code(self) -> int:
        if self.incomplete:
            return EXIT_INCOMPLETE
        return EXIT_FINDINGS if self.findings else EXIT_CLEAN

    def to_dict(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "subject": {"kind": self.kind, "identifier": self.identifier},
            "provenanceMode": self.provenance_mode,
            "status": {EXIT_CLEAN: "clean", EXIT_FINDINGS: "findings", EXIT_INCOMPLETE: "incomplete"}[self.exit_code],
            "verdicts": self.verdicts,
            "findings": self.findings,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def render(self) -> str:
        """Plain-text summary; the finding count matches the structured form."""
        d = self.to_dict()
        lines = [
            f"{self.kind} audit of {self.identifier}",
            f"  mode: {self.provenance_mode}   status: {d['status']}   findings: {len(self.findings)}",
        ]
        for key in sorted(self.verdicts):
            lines.append(f"  {key}: {_summarise(self.verdicts[key])}")
        if self.findings:
            lines.append("  findings:")
            for f in self.findings:
                lines.append(f"    - [{f.get('category', '?')}] {f.get('explanation', '')}")
        for diag in self.diagnostics:
            lines.append(f"  {diag.severity}: {diag.code}: {diag.message}")
        return "\n".join(lines) + "\n"


def _summarise(value) -> str:
    if isinstance(value, dict):
        keys = ("sound", "evidence", "mutable", "pivotIndex", "score", "similar", "classification", "satisfied")
        parts = [f"{k}={value[k]}" for k in keys if k in value]
        return ", ".join(parts) if parts else f"{len(value)} fields"
    if isinstance(value, list):
        return f"{len(value)} entries"
    return str(value)
