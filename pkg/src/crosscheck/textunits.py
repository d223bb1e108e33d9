"""Sentences, atomic claims, and generated questions.

Offsets throughout are Unicode code-point indices into the original text,
never byte offsets, so spans survive round-trips through JSON and the HTTP
API unchanged.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, replace
from importlib import resources

from .errors import (
    EmptyDecompositionError,
    MalformedQuestionError,
    SpanError,
    ValidationError,
)
from .gateway import Gateway, QAResult

log = logging.getLogger(__name__)

_TERMINATORS = ".!?"
# Characters that may trail a terminator yet still belong to the sentence.
_CLOSERS = "\"'”’)]»"
# Characters that, when they open the next fragment, mark a sentence boundary.
_OPENERS = "\"'“‘(«"


def _load_abbreviations() -> frozenset[str]:
    ref = resources.files("crosscheck.data").joinpath("abbreviations.txt")
    tokens = []
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.append(line)
    return frozenset(tokens)


ABBREVIATIONS = _load_abbreviations()


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [start, end) span of one sentence within a text."""

    index: int
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValidationError(f"degenerate sentence span ({self.start}, {self.end})")


def _abbreviation_before(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : dot_index + 1].lstrip(_OPENERS + "([")
    return token in ABBREVIATIONS


def segment_sentences(text: str) -> list[SentenceSpan]:
    """Split text into ordered, non-overlapping sentence spans.

    A sentence ends at a terminator run (. ! ?) followed by whitespace and
    an uppercase letter or opening quote, unless the terminator closes a
    listed abbreviation. Paragraph breaks end a sentence unconditionally.
    Spans cover every non-whitespace character; the gaps between them are
    whitespace only.
    """
    spans: list[SentenceSpan] = []
    n = len(text)
    i = 0
    start: int | None = None
    last = -1

    def close(end: int) -> None:
        nonlocal start
        spans.append(SentenceSpan(len(spans), start, end))
        start = None

    while i < n:
        ch = text[i]
        if ch.isspace():
            j = i
            newlines = 0
            while j < n and text[j].isspace():
                if text[j] == "\n":
                    newlines += 1
                j += 1
            if start is not None and newlines >= 2:
                close(last + 1)
            i = j
            continue
        if start is None:
            start = i
        last = i
        if ch in _TERMINATORS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINATORS:
                j += 1
            k = j + 1
            while k < n and text[k] in _CLOSERS:
                k += 1
            last = k - 1
            m = k
            saw_space = False
            while m < n and text[m].isspace():
                saw_space = True
                m += 1
            if m >= n:
                close(k)
            elif saw_space and (text[m].isupper() or text[m] in _OPENERS):
                if not (j == i and ch == "." and _abbreviation_before(text, i)):
                    close(k)
            i = k
            continue
        i += 1
    if start is not None:
        close(last + 1)
    return spans


def sentence_text(text: str, span: SentenceSpan) -> str:
    return text[span.start : span.end]


@dataclass(frozen=True)
class AtomicClaim:
    """One independently checkable fact extracted from a sentence.

    The id hashes the source sentence text and the claim's ordinal, so an
    edit that leaves a sentence untouched leaves its claim ids untouched
    even when the sentence moves to a new index.
    """

    id: str
    text: str
    sentence_index: int
    ordinal: int

    def __post_init__(self):
        if not self.text:
            raise ValidationError("claim text must be non-empty")
        if self.ordinal < 0 or self.sentence_index < 0:
            raise ValidationError("claim ordinal and sentence index must be non-negative")


def claim_id(sentence: str, ordinal: int) -> str:
    digest = hashlib.sha256(f"{sentence}\x1f{ordinal}".encode("utf-8")).hexdigest()
    return digest[:16]


def decompose_claims(sentence: str, gateway: Gateway, sentence_index: int = 0) -> list[AtomicClaim]:
    """Break one sentence into atomic claims via the decomposition template.

    Only lines prefixed with "- " are parsed; other non-empty lines are
    skipped with a warning. A completion yielding zero claims raises
    EmptyDecompositionError.
    """
    if not sentence.strip():
        raise ValidationError("sentence must be non-empty")
    completion = gateway.complete_task("claim_decomposition", {"sentence": sentence})
    claims: list[AtomicClaim] = []
    for line in completion.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.startswith("- "):
            log.warning("skipping unparseable decomposition line: %r", stripped)
            continue
        text = stripped[2:].strip()
        if not text:
            log.warning("skipping empty decomposition item")
            continue
        claims.append(
            AtomicClaim(
                id=claim_id(sentence, len(claims)),
                text=text,
                sentence_index=sentence_index,
                ordinal=len(claims),
            )
        )
    if not claims:
        raise EmptyDecompositionError(f"no claims parsed from completion {completion!r}")
    return claims


@dataclass(frozen=True)
class QuestionSource:
    """Where a question came from: a claim, or a brushed span of a sentence."""

    kind: str
    claim_id: str | None = None
    sentence_index: int | None = None
    start: int | None = None
    end: int | None = None

    def __post_init__(self):
        if self.kind not in ("from_claim", "from_span"):
            raise ValidationError(f"unknown question source kind {self.kind!r}")
        if self.kind == "from_claim" and not self.claim_id:
            raise ValidationError("from_claim source requires a claim id")
        if self.kind == "from_span" and (
            self.sentence_index is None or self.start is None or self.end is None
        ):
            raise ValidationError("from_span source requires sentence index and span")


@dataclass(frozen=True)
class Question:
    text: str
    source: QuestionSource
    validated: bool = False

    def __post_init__(self):
        if not self.text.endswith("?"):
            raise ValidationError("question text must end with '?'")


def _question_from_completion(completion: str, source: QuestionSource) -> Question:
    first_line = next((ln.strip() for ln in completion.splitlines() if ln.strip()), "")
    if not first_line.endswith("?"):
        raise MalformedQuestionError(
            f"completion does not end with a question mark: {completion!r}"
        )
    return Question(text=first_line, source=source)


def question_from_claim(claim: AtomicClaim, gateway: Gateway) -> Question:
    completion = gateway.complete_task("question_from_claim", {"claim": claim.text})
    return _question_from_completion(
        completion, QuestionSource(kind="from_claim", claim_id=claim.id)
    )


def question_from_span(
    sentence: str, start: int, end: int, gateway: Gateway, sentence_index: int = 0
) -> Question:
    """Generate a question describing the selected words of a sentence."""
    if start < 0 or end > len(sentence) or start >= end:
        raise SpanError(f"span ({start}, {end}) outside sentence of length {len(sentence)}")
    target = sentence[start:end]
    if not target.strip():
        raise SpanError(f"span ({start}, {end}) selects only whitespace")
    completion = gateway.complete_task(
        "question_from_span", {"context": sentence, "target": target}
    )
    return _question_from_completion(
        completion,
        QuestionSource(kind="from_span", sentence_index=sentence_index, start=start, end=end),
    )


def validate_question(
    question: Question, presented_text: str, gateway: Gateway
) -> tuple[Question, QAResult]:
    """A question is usable only if its answer can be found in the presented text.

    Returns the question with its validated flag set and the focal answer
    extracted from the presented text (not-found when validation fails).
    """
    if not presented_text:
        return replace(question, validated=False), QAResult(found=False)
    result = gateway.extract_answer(question.text, presented_text)
    return replace(question, validated=result.found), result
