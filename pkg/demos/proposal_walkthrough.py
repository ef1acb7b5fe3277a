"""Classify the incident proposals and show why one of them was flagged.

    python demos/proposal_walkthrough.py
"""

from __future__ import annotations

from collections import Counter

from _fixtures import FIXTURES, replay

from govaudit.proposal import audit_proposal, load_proposals


def main() -> None:
    provider = replay()
    audits = [audit_proposal(p, provider) for p in load_proposals(FIXTURES / "incidents.json")]

    print(f"{'proposal':26} classification")
    for audit in audits:
        print(f"{audit.proposal.id:26} {audit.classification}")
    print("\ncounts:", dict(Counter(a.classification for a in audits)))

    yam = next(a for a in audits if a.proposal.id == "yam")
    print("\nWhy YAM is flagged:")
    print("  description:", yam.proposal.description)
    for intention in yam.consistency.intentions:
        print("  intention:  ", intention.text())
    for action, match in zip(yam.consistency.code_actions, yam.consistency.function_matches):
        print(f"  code calls:  {action.function_name} (best match score {match.score:.2f})")
    print("  The call that changes the governor is never described.")


if __name__ == "__main__":
    main()
