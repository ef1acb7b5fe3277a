"""Run the documentation audit with a scripted model and print the transcripts.

    python demos/docs_walkthrough.py
"""

from __future__ import annotations

from _fixtures import FIXTURES

from govaudit.docaudit import ScriptedLlm, audit_documentation


def main() -> None:
    text = (FIXTURES / "docs" / "harbor.md").read_text()
    llm = ScriptedLlm.from_jsonl(FIXTURES / "docs" / "harbor.jsonl")
    report = audit_documentation(text, llm, backoff=0)
    print(f"{report.chunks} chunk(s), {len(llm.prompts)} prompts\n")
    for result in report.results:
        print(f"{result.rule_id}: {'satisfied' if result.satisfied else 'not satisfied'}")
        for q in result.transcript:
            note = " (cached)" if q.cached else ""
            demoted = [e.demotion for e in q.entries if e.demotion]
            extra = f" [demoted: {', '.join(demoted)}]" if demoted else ""
            print(f"  {'Yes' if q.answer else 'No ':3} {q.question}{note}{extra}")
    print("\nThe guardian answer was a Yes the document did not back up, so it was demoted.")


if __name__ == "__main__":
    main()
