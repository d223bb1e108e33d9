"""A hand-authored offline backend for a small worked example.

Five short biographies of a footballer named Rodrigo, with every model
judgment the pipeline will request written out as fixture entries. The
tables cover the base verification run, a brush over "footballer", and
three edits of the presented text (append a sentence, change it, prepend
one), so the CLI, the HTTP API, and the tests can all run the same example
without any model backend.

Run as a module to write the fixture file:

    python -m crosscheck.demo fixtures/rodrigo.json
"""

from __future__ import annotations

import sys

from .gateway import FixtureTable, fixture_from_dict, render_template
from .serialization import canonical_json

DEMO_PROMPT = "Tell me a bio of Rodrigo."

PRESENTED = "Rodrigo is a Spanish footballer."
SAMPLE_1 = "Rodrigo is a portuguese footballer."
SAMPLE_2 = "Rodrigo is a midfielder from Europe."
SAMPLE_3 = "Rodrigo plays for the Spain national team."
SAMPLE_4 = "Rodrigo is from Spain."
SAMPLES = (PRESENTED, SAMPLE_1, SAMPLE_2, SAMPLE_3, SAMPLE_4)

CLAIM_NATIONALITY = "Rodrigo is Spanish."
CLAIM_PROFESSION = "Rodrigo is a footballer."
Q_NATIONALITY = "What nationality is Rodrigo?"
Q_PROFESSION = "What is Rodrigo's profession?"

# Edited versions of the presented text exercised by the session tests.
APPENDED_SENTENCE = "He wears number 16."
CHANGED_SENTENCE = "He wears number 10."
PREPENDED_SENTENCE = "Early years."
EDIT_APPEND = f"{PRESENTED} {APPENDED_SENTENCE}"
EDIT_CHANGE = f"{PRESENTED} {CHANGED_SENTENCE}"
EDIT_PREPEND = f"{PREPENDED_SENTENCE} {PRESENTED}"

CLAIM_NUMBER_16 = "Rodrigo wears number 16."
CLAIM_NUMBER_10 = "Rodrigo wears number 10."
CLAIM_EARLY_YEARS = "The early years are covered."
Q_NUMBER = "What number does Rodrigo wear?"
Q_EARLY_YEARS = "What years are covered?"

BRUSH_TARGET = "footballer"
BRUSH_START = PRESENTED.index(BRUSH_TARGET)
BRUSH_END = BRUSH_START + len(BRUSH_TARGET)


def _ctx(question: str, answer: str) -> str:
    return f"{question} {answer}"


def _qa(question: str, passage: str, answer: str | None, confidence: float = 0.9) -> dict:
    if answer is None:
        return {"question": question, "passage": passage, "found": False, "confidence": 0.1}
    start = passage.index(answer)
    return {
        "question": question,
        "passage": passage,
        "found": True,
        "answer": answer,
        "start": start,
        "end": start + len(answer),
        "confidence": confidence,
    }


def _nli(premise: str, hypothesis: str, label: str) -> dict:
    return {"premise": premise, "hypothesis": hypothesis, "label": label}


def _task(template: str, slots: dict, completion: str) -> dict:
    return {
        "template": template,
        "prompt": render_template(template, slots),
        "completion": completion,
    }


def _base_entries() -> tuple[list, list, list]:
    ctx_spanish = _ctx(Q_NATIONALITY, "Spanish")
    ctx_portuguese = _ctx(Q_NATIONALITY, "portuguese")
    ctx_europe = _ctx(Q_NATIONALITY, "from Europe")
    ctx_spain = _ctx(Q_NATIONALITY, "from Spain")
    ctx_footballer = _ctx(Q_PROFESSION, "footballer")
    ctx_midfielder = _ctx(Q_PROFESSION, "midfielder")

    qa = [
        _qa(Q_NATIONALITY, PRESENTED, "Spanish"),
        _qa(Q_NATIONALITY, SAMPLE_1, "portuguese"),
        _qa(Q_NATIONALITY, SAMPLE_2, "from Europe"),
        _qa(Q_NATIONALITY, SAMPLE_3, None),
        _qa(Q_NATIONALITY, SAMPLE_4, "from Spain"),
        _qa(Q_PROFESSION, PRESENTED, "footballer"),
        _qa(Q_PROFESSION, SAMPLE_1, "footballer"),
        _qa(Q_PROFESSION, SAMPLE_2, "midfielder"),
        _qa(Q_PROFESSION, SAMPLE_3, None),
        _qa(Q_PROFESSION, SAMPLE_4, None),
    ]

    nli = [
        # Presented text against each claim (first leg of the answer filter).
        _nli(PRESENTED, CLAIM_NATIONALITY, "entailment"),
        _nli(PRESENTED, CLAIM_PROFESSION, "entailment"),
        # Claim against each question-framed answer (second leg).
        _nli(CLAIM_NATIONALITY, ctx_spanish, "entailment"),
        _nli(CLAIM_NATIONALITY, ctx_portuguese, "entailment"),
        _nli(CLAIM_NATIONALITY, ctx_europe, "entailment"),
        _nli(CLAIM_NATIONALITY, ctx_spain, "entailment"),
        _nli(CLAIM_PROFESSION, ctx_footballer, "entailment"),
        _nli(CLAIM_PROFESSION, ctx_midfielder, "entailment"),
        # Pairwise answer comparisons driving the clustering.
        _nli(ctx_spanish, ctx_portuguese, "contradiction"),
        _nli(ctx_portuguese, ctx_spanish, "contradiction"),
        _nli(ctx_spanish, ctx_europe, "entailment"),
        _nli(ctx_europe, ctx_spanish, "neutral"),
        _nli(ctx_portuguese, ctx_europe, "entailment"),
        _nli(ctx_europe, ctx_portuguese, "neutral"),
        _nli(ctx_spanish, ctx_spain, "entailment"),
        _nli(ctx_spain, ctx_spanish, "entailment"),
        _nli(ctx_portuguese, ctx_spain, "contradiction"),
        _nli(ctx_spain, ctx_portuguese, "contradiction"),
        _nli(ctx_spain, ctx_europe, "entailment"),
        _nli(ctx_europe, ctx_spain, "neutral"),
        _nli(ctx_footballer, ctx_midfielder, "neutral"),
        _nli(ctx_midfielder, ctx_footballer, "entailment"),
        # Cluster representatives against the claims.
        _nli(ctx_spanish, CLAIM_NATIONALITY, "entailment"),
        _nli(ctx_portuguese, CLAIM_NATIONALITY, "contradiction"),
        _nli(ctx_europe, CLAIM_NATIONALITY, "neutral"),
        _nli(ctx_footballer, CLAIM_PROFESSION, "entailment"),
        _nli(ctx_midfielder, CLAIM_PROFESSION, "entailment"),
        # Sentence-level verdicts of each additional sample.
        _nli(SAMPLE_1, CLAIM_NATIONALITY, "contradiction"),
        _nli(SAMPLE_2, CLAIM_NATIONALITY, "neutral"),
        _nli(SAMPLE_3, CLAIM_NATIONALITY, "entailment"),
        _nli(SAMPLE_4, CLAIM_NATIONALITY, "entailment"),
        _nli(SAMPLE_1, CLAIM_PROFESSION, "entailment"),
        _nli(SAMPLE_2, CLAIM_PROFESSION, "entailment"),
        _nli(SAMPLE_3, CLAIM_PROFESSION, "neutral"),
        _nli(SAMPLE_4, CLAIM_PROFESSION, "neutral"),
    ]

    tasks = [
        _task(
            "claim_decomposition",
            {"sentence": PRESENTED},
            f"- {CLAIM_NATIONALITY}\n- {CLAIM_PROFESSION}",
        ),
        _task("question_from_claim", {"claim": CLAIM_NATIONALITY}, Q_NATIONALITY),
        _task("question_from_claim", {"claim": CLAIM_PROFESSION}, Q_PROFESSION),
    ]
    return qa, nli, tasks


def _brush_entries() -> tuple[list, list, list]:
    ctx_footballer = _ctx(Q_PROFESSION, "footballer")
    ctx_midfielder = _ctx(Q_PROFESSION, "midfielder")
    nli = [
        _nli(PRESENTED, ctx_footballer, "entailment"),
        _nli(PRESENTED, ctx_midfielder, "neutral"),
        _nli(ctx_footballer, PRESENTED, "neutral"),
        _nli(SAMPLE_1, PRESENTED, "contradiction"),
        _nli(SAMPLE_2, PRESENTED, "neutral"),
        _nli(SAMPLE_3, PRESENTED, "neutral"),
        _nli(SAMPLE_4, PRESENTED, "neutral"),
    ]
    tasks = [
        _task(
            "question_from_span",
            {"context": PRESENTED, "target": BRUSH_TARGET},
            Q_PROFESSION,
        )
    ]
    return [], nli, tasks


def _edit_entries() -> tuple[list, list, list]:
    ctx_16 = _ctx(Q_NUMBER, "16")
    ctx_10 = _ctx(Q_NUMBER, "10")

    qa = [
        _qa(Q_NUMBER, EDIT_APPEND, "16"),
        _qa(Q_NUMBER, EDIT_CHANGE, "10"),
        _qa(Q_NUMBER, SAMPLE_1, None),
        _qa(Q_NUMBER, SAMPLE_2, None),
        _qa(Q_NUMBER, SAMPLE_3, None),
        _qa(Q_NUMBER, SAMPLE_4, None),
        _qa(Q_EARLY_YEARS, EDIT_PREPEND, None),
    ]

    nli = [
        _nli(EDIT_APPEND, CLAIM_NUMBER_16, "entailment"),
        _nli(CLAIM_NUMBER_16, ctx_16, "entailment"),
        _nli(ctx_16, CLAIM_NUMBER_16, "entailment"),
        _nli(SAMPLE_1, CLAIM_NUMBER_16, "neutral"),
        _nli(SAMPLE_2, CLAIM_NUMBER_16, "neutral"),
        _nli(SAMPLE_3, CLAIM_NUMBER_16, "neutral"),
        _nli(SAMPLE_4, CLAIM_NUMBER_16, "neutral"),
        _nli(EDIT_CHANGE, CLAIM_NUMBER_10, "entailment"),
        _nli(CLAIM_NUMBER_10, ctx_10, "entailment"),
        _nli(ctx_10, CLAIM_NUMBER_10, "entailment"),
        _nli(SAMPLE_1, CLAIM_NUMBER_10, "neutral"),
        _nli(SAMPLE_2, CLAIM_NUMBER_10, "neutral"),
        _nli(SAMPLE_3, CLAIM_NUMBER_10, "neutral"),
        _nli(SAMPLE_4, CLAIM_NUMBER_10, "neutral"),
        _nli(SAMPLE_1, CLAIM_EARLY_YEARS, "neutral"),
        _nli(SAMPLE_2, CLAIM_EARLY_YEARS, "neutral"),
        _nli(SAMPLE_3, CLAIM_EARLY_YEARS, "neutral"),
        _nli(SAMPLE_4, CLAIM_EARLY_YEARS, "neutral"),
    ]

    tasks = [
        _task(
            "claim_decomposition", {"sentence": APPENDED_SENTENCE}, f"- {CLAIM_NUMBER_16}"
        ),
        _task("question_from_claim", {"claim": CLAIM_NUMBER_16}, Q_NUMBER),
        _task(
            "claim_decomposition", {"sentence": CHANGED_SENTENCE}, f"- {CLAIM_NUMBER_10}"
        ),
        _task("question_from_claim", {"claim": CLAIM_NUMBER_10}, Q_NUMBER),
        _task(
            "claim_decomposition", {"sentence": PREPENDED_SENTENCE}, f"- {CLAIM_EARLY_YEARS}"
        ),
        _task("question_from_claim", {"claim": CLAIM_EARLY_YEARS}, Q_EARLY_YEARS),
    ]
    return qa, nli, tasks


def build_fixture_payload() -> dict:
    """The complete fixture document for the worked example."""
    qa: list = []
    nli: list = []
    tasks: list = []
    for part in (_base_entries(), _brush_entries(), _edit_entries()):
        qa.extend(part[0])
        nli.extend(part[1])
        tasks.extend(part[2])
    return {"generations": list(SAMPLES), "qa": qa, "nli": nli, "tasks": tasks}


def demo_fixture_table() -> FixtureTable:
    return fixture_from_dict(build_fixture_payload())


def write_fixture(path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(build_fixture_payload()))


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures/rodrigo.json"
    write_fixture(target)
    print(f"wrote {target}")
