"""Answer collection, filtering, clustering, and scoring for one response.

The pipeline mirrors how a reader would cross-examine a response: ask each
claim's question against every sample, discard answers that disagree with
the claim's own framing, group the survivors into semantically equal
clusters, relate each cluster back to the claim, and score the claim by how
many additional samples support it sentence-wise.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import (
    EmptyDecompositionError,
    MalformedQuestionError,
    UndefinedScoreError,
    ValidationError,
)
from .gateway import CONTRADICTION, ENTAILMENT, Gateway
from .textunits import (
    AtomicClaim,
    Question,
    SentenceSpan,
    decompose_claims,
    question_from_claim,
    segment_sentences,
    sentence_text,
    validate_question,
)

log = logging.getLogger(__name__)

VALID = "valid"
FILTERED_NA = "filtered_na"
NO_ANSWER = "no_answer"
ANSWER_STATUSES = (VALID, FILTERED_NA, NO_ANSWER)

SUPPORT = "support"
CONTRADICT = "contradict"
SAMPLE_NEUTRAL = "neutral"
SAMPLE_LABELS = (SUPPORT, CONTRADICT, SAMPLE_NEUTRAL)

REL_EQUAL = "equal"
REL_SUPPORT = "support"
REL_CONTRADICTION = "contradiction"
REL_NEUTRAL = "neutral"
CLUSTER_RELATIONS = (REL_EQUAL, REL_SUPPORT, REL_CONTRADICTION, REL_NEUTRAL)

STATUS_OK = "ok"
STATUS_QUESTION_MALFORMED = "question_malformed"
STATUS_QUESTION_UNANSWERABLE = "question_unanswerable"


@dataclass(frozen=True)
class GenerationSample:
    """One model generation with its sentence segmentation."""

    index: int
    text: str
    sentences: tuple[SentenceSpan, ...]

    @classmethod
    def from_text(cls, index: int, text: str) -> "GenerationSample":
        return cls(index=index, text=text, sentences=tuple(segment_sentences(text)))

    def sentence(self, span: SentenceSpan) -> str:
        return sentence_text(self.text, span)


@dataclass(frozen=True)
class AnswerRecord:
    """One sample's answer to a claim question.

    A filtered record keeps its pre-filter text and span so audits can show
    what was discarded; a no-answer record never had them.
    """

    sample_index: int
    status: str
    text: str = ""
    start: int | None = None
    end: int | None = None
    qa_confidence: float = 0.0

    def __post_init__(self):
        if self.status not in ANSWER_STATUSES:
            raise ValidationError(f"unknown answer status {self.status!r}")
        if self.status != NO_ANSWER and not self.text:
            raise ValidationError(f"{self.status} answer requires text")


@dataclass(frozen=True)
class AnswerCluster:
    """A set of mutually entailed answers, in ascending sample order.

    The representative is the text of the lowest-indexed member. The
    relation to the claim is filled in by classify_cluster.
    """

    id: str
    member_indices: tuple[int, ...]
    representative_text: str
    relation: str | None = None

    def __post_init__(self):
        if not self.member_indices:
            raise ValidationError("cluster requires at least one member")
        if list(self.member_indices) != sorted(self.member_indices):
            raise ValidationError("cluster members must be in ascending sample order")
        if self.relation is not None and self.relation not in CLUSTER_RELATIONS:
            raise ValidationError(f"unknown cluster relation {self.relation!r}")

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class ClaimVerification:
    """Everything the pipeline established about one atomic claim."""

    claim: AtomicClaim
    status: str
    question: Question | None
    focal_answer: AnswerRecord | None
    answers: tuple[AnswerRecord, ...]
    clusters: tuple[AnswerCluster, ...]
    per_sample_labels: tuple[str, ...]
    per_sample_sentences: tuple[int | None, ...]
    consistency_score: float

    def __post_init__(self):
        if len(self.per_sample_labels) != len(self.per_sample_sentences):
            raise ValidationError("per-sample labels and sentence indices must align")


@dataclass(frozen=True)
class UnverifiedMarker:
    """A sentence or claim the pipeline could not verify, and why."""

    sentence_index: int
    reason: str
    claim_id: str | None = None
    claim_text: str | None = None


@dataclass(frozen=True)
class VerificationResult:
    """The verified state of one presented response against its samples."""

    samples: tuple[GenerationSample, ...]
    claim_verifications: tuple[ClaimVerification, ...]
    unverified: tuple[UnverifiedMarker, ...]
    config: dict = field(default_factory=dict)

    @property
    def presented(self) -> GenerationSample:
        return self.samples[0]

    @property
    def additional_count(self) -> int:
        return len(self.samples) - 1


def contextualize(question: Question | str, answer_text: str) -> str:
    """An answer is compared in the frame of its question: "<question> <answer>"."""
    q = question.text if isinstance(question, Question) else question
    return f"{q} {answer_text}"


def collect_answers(
    question: Question, sample_texts: list[str], gateway: Gateway
) -> list[AnswerRecord]:
    """Extract one answer record per sample, in sample order."""
    if not question.validated:
        raise ValidationError("collect_answers requires a validated question")
    records: list[AnswerRecord] = []
    for index, text in enumerate(sample_texts):
        if not text.strip():
            records.append(AnswerRecord(sample_index=index, status=NO_ANSWER))
            continue
        qa = gateway.extract_answer(question.text, text)
        if qa.found:
            records.append(
                AnswerRecord(
                    sample_index=index,
                    status=VALID,
                    text=qa.answer_text,
                    start=qa.start,
                    end=qa.end,
                    qa_confidence=qa.confidence,
                )
            )
        else:
            records.append(
                AnswerRecord(sample_index=index, status=NO_ANSWER, qa_confidence=qa.confidence)
            )
    return records


def filter_answer(
    presented_text: str,
    claim: AtomicClaim,
    question: Question,
    answer: AnswerRecord,
    gateway: Gateway,
) -> AnswerRecord:
    """Keep an answer only when the two entailment directions agree.

    The label of (presented text => claim) must equal the label of
    (claim => question-framed answer); on disagreement the record is
    demoted to filtered_na, keeping its text and span for audit. Records
    that are not valid pass through unchanged.
    """
    if answer.status != VALID:
        return answer
    first = gateway.nli(presented_text, claim.text).label
    second = gateway.nli(claim.text, contextualize(question, answer.text)).label
    if first != second:
        return replace(answer, status=FILTERED_NA)
    return answer


def cluster_answers(
    question: Question,
    answers: list[AnswerRecord],
    gateway: Gateway,
    id_prefix: str = "cluster:",
) -> list[AnswerCluster]:
    """Greedy first-fit clustering of valid answers in ascending sample order.

    An answer joins the first existing cluster in creation order whose every
    member it mutually entails (both directions, framed by the question);
    otherwise it opens a new singleton cluster. Non-valid records are
    skipped.
    """
    members: list[list[AnswerRecord]] = []
    for record in sorted(answers, key=lambda r: r.sample_index):
        if record.status != VALID:
            continue
        context = contextualize(question, record.text)
        placed = False
        for group in members:
            fits = True
            for existing in group:
                existing_context = contextualize(question, existing.text)
                if gateway.nli(existing_context, context).label != ENTAILMENT:
                    fits = False
                    break
                if gateway.nli(context, existing_context).label != ENTAILMENT:
                    fits = False
                    break
            if fits:
                group.append(record)
                placed = True
                break
        if not placed:
            members.append([record])
    return [
        AnswerCluster(
            id=f"{id_prefix}{position}",
            member_indices=tuple(r.sample_index for r in group),
            representative_text=group[0].text,
        )
        for position, group in enumerate(members)
    ]


def classify_cluster(
    cluster: AnswerCluster, claim: AtomicClaim, question: Question, gateway: Gateway
) -> str:
    """Relate a cluster to its claim through the representative answer.

    Mutual entailment is equal; one-directional entailment toward the claim
    is support; contradiction toward the claim is contradiction; anything
    else is neutral.
    """
    representative = contextualize(question, cluster.representative_text)
    forward = gateway.nli(representative, claim.text).label
    if forward == CONTRADICTION:
        return REL_CONTRADICTION
    if forward == ENTAILMENT:
        backward = gateway.nli(claim.text, representative).label
        return REL_EQUAL if backward == ENTAILMENT else REL_SUPPORT
    return REL_NEUTRAL


def _support_judgment(
    sample: GenerationSample, claim: AtomicClaim, gateway: Gateway
) -> tuple[str, int | None]:
    first_contradiction: int | None = None
    for span in sample.sentences:
        label = gateway.nli(sample.sentence(span), claim.text).label
        if label == ENTAILMENT:
            return SUPPORT, span.index
        if label == CONTRADICTION and first_contradiction is None:
            first_contradiction = span.index
    if first_contradiction is not None:
        return CONTRADICT, first_contradiction
    return SAMPLE_NEUTRAL, None


def claim_support_label(sample: GenerationSample, claim: AtomicClaim, gateway: Gateway) -> str:
    """Sentence-level verdict of one sample on one claim.

    Any entailing sentence makes the sample support the claim; otherwise any
    contradicting sentence makes it contradict; otherwise it is neutral. A
    sample with no sentences is neutral.
    """
    return _support_judgment(sample, claim, gateway)[0]


def consistency_score(
    claim: AtomicClaim, samples: list[GenerationSample], gateway: Gateway
) -> float:
    """Fraction of additional samples (index 0 excluded) that support the claim."""
    additional = [s for s in samples if s.index != 0]
    if not additional:
        raise UndefinedScoreError("consistency score requires at least one additional sample")
    labels = [claim_support_label(sample, claim, gateway) for sample in additional]
    return labels.count(SUPPORT) / len(labels)


def verify_claim(
    claim: AtomicClaim,
    samples: list[GenerationSample],
    gateway: Gateway,
) -> tuple[ClaimVerification, UnverifiedMarker | None]:
    """Run the full per-claim pipeline; degrade gracefully on question failures.

    Support labels and the consistency score never depend on the question,
    so they are produced even when question generation or validation fails;
    in that case the claim carries no answers, clusters, or focal answer and
    an unverified marker explains why.
    """
    presented = samples[0]
    judgments = [_support_judgment(sample, claim, gateway) for sample in samples[1:]]
    labels = tuple(j[0] for j in judgments)
    label_sentences = tuple(j[1] for j in judgments)
    score = labels.count(SUPPORT) / len(labels)

    def degraded(status: str, question: Question | None, reason: str):
        verification = ClaimVerification(
            claim=claim,
            status=status,
            question=question,
            focal_answer=None,
            answers=(),
            clusters=(),
            per_sample_labels=labels,
            per_sample_sentences=label_sentences,
            consistency_score=score,
        )
        marker = UnverifiedMarker(
            sentence_index=claim.sentence_index,
            reason=reason,
            claim_id=claim.id,
            claim_text=claim.text,
        )
        return verification, marker

    try:
        question = question_from_claim(claim, gateway)
    except MalformedQuestionError as exc:
        log.warning("claim %s: %s", claim.id, exc)
        return degraded(STATUS_QUESTION_MALFORMED, None, f"malformed question: {exc}")

    question, _focal_qa = validate_question(question, presented.text, gateway)
    if not question.validated:
        return degraded(
            STATUS_QUESTION_UNANSWERABLE,
            question,
            "question found no answer in the presented text",
        )

    answers = collect_answers(question, [s.text for s in samples], gateway)
    answers = [
        filter_answer(presented.text, claim, question, record, gateway) for record in answers
    ]
    clusters = cluster_answers(question, answers, gateway, id_prefix=f"{claim.id}:")
    clusters = [
        replace(cluster, relation=classify_cluster(cluster, claim, question, gateway))
        for cluster in clusters
    ]
    verification = ClaimVerification(
        claim=claim,
        status=STATUS_OK,
        question=question,
        focal_answer=answers[0],
        answers=tuple(answers),
        clusters=tuple(clusters),
        per_sample_labels=labels,
        per_sample_sentences=label_sentences,
        consistency_score=score,
    )
    return verification, None


def decompose_presented(
    presented: GenerationSample, gateway: Gateway
) -> tuple[list[AtomicClaim], list[UnverifiedMarker]]:
    """Decompose every sentence of the presented sample, collecting failures."""
    claims: list[AtomicClaim] = []
    markers: list[UnverifiedMarker] = []
    for span in presented.sentences:
        try:
            claims.extend(decompose_claims(presented.sentence(span), gateway, span.index))
        except EmptyDecompositionError as exc:
            log.warning("sentence %d: %s", span.index, exc)
            markers.append(
                UnverifiedMarker(sentence_index=span.index, reason=f"empty decomposition: {exc}")
            )
    return claims, markers


def verify_generation(
    prompt: str, n: int, gateway: Gateway, max_workers: int = 4
) -> VerificationResult:
    """Sample n generations for a prompt and verify the first against the rest.

    Per-claim pipelines run concurrently with bounded fan-out; results are
    assembled in claim order, so the output is identical regardless of
    scheduling. Backend transport failures abort the run.
    """
    if n < 2:
        raise ValidationError("verification requires the presented response plus at least one sample")
    texts = gateway.generate(prompt, n)
    samples = [GenerationSample.from_text(i, text) for i, text in enumerate(texts)]
    claims, markers = decompose_presented(samples[0], gateway)

    verifications: list[ClaimVerification] = []
    if claims:
        workers = max(1, min(max_workers, len(claims)))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(lambda c: verify_claim(c, samples, gateway), claims))
        for verification, marker in outcomes:
            verifications.append(verification)
            if marker is not None:
                markers.append(marker)

    markers.sort(key=lambda m: (m.sentence_index, m.claim_id or ""))
    snapshot = {
        "backend": gateway.backend.name,
        "num_samples": n,
        "max_workers": max_workers,
        "backend_config": gateway.config.as_dict(),
    }
    return VerificationResult(
        samples=tuple(samples),
        claim_verifications=tuple(verifications),
        unverified=tuple(markers),
        config=snapshot,
    )
