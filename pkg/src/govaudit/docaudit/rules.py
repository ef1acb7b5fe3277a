"""Documentation rules and the question chain they share."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

RULE_IDS = (
    "MemberParticipation",
    "MemberExit",
    "VotingPower",
    "MinorityProtection",
    "GovernanceProcessGuide",
    "AppointmentOfGuardian",
)


@dataclass(frozen=True)
class QuestionChainNode:
    id: str
    question: str
    children: tuple[str, ...] = ()
    reconstructed: bool = False


@dataclass(frozen=True)
class DocumentationRule:
    id: str
    path: tuple[str, ...]  # node ids, root first
    questions: tuple[str, ...]
    reconstructed: bool = False


@dataclass(frozen=True)
class QuestionChain:
    nodes: dict[str, QuestionChainNode]
    rules: tuple[DocumentationRule, ...]

    def rule(self, rule_id: str) -> DocumentationRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    @property
    def roots(self) -> list[str]:
        children = {c for n in self.nodes.values() for c in n.children}
        return sorted(n for n in self.nodes if n not in children)


def _check_acyclic(nodes: dict[str, QuestionChainNode]) -> None:
    state: dict[str, int] = {}

    def visit(n: str) -> None:
        if state.get(n) == 1:
            raise ValueError(f"question chain has a cycle through {n!r}")
        if state.get(n) == 2:
            return
        state[n] = 1
        for c in nodes[n].children:
            visit(c)
        state[n] = 2

    for n in nodes:
        visit(n)


def parse_question_chain(data: dict) -> QuestionChain:
    raw_nodes = data["nodes"]
    children: dict[str, list[str]] = {n: [] for n in raw_nodes}
    rules = []
    for r in data["rules"]:
        path = tuple(r["path"])
        for node in path:
            if node not in raw_nodes:
                raise ValueError(f"rule {r['id']} refers to unknown node {node!r}")
        for parent, child in zip(path, path[1:]):
            if child not in children[parent]:
                children[parent].append(child)
        questions = tuple(raw_nodes[n]["question"] for n in path)
        rules.append(DocumentationRule(r["id"], path, questions, bool(r.get("reconstructed", False))))
    nodes = {
        n: QuestionChainNode(n, v["question"], tuple(children[n]), bool(v.get("reconstructed", False)))
        for n, v in raw_nodes.items()
    }
    _check_acyclic(nodes)
    return QuestionChain(nodes, tuple(rules))


def load_question_chain(path: str | Path | None = None) -> QuestionChain:
    """The shipped chain, or one read from ``path``."""
    if path is None:
        text = resources.files("govaudit.data").joinpath("questions.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_question_chain(json.loads(text))
