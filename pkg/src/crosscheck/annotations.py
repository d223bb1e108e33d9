"""Keyword annotations, per-claim summary rows, and evidence projections.

These are pure functions over a VerificationResult: they re-shape what the
pipeline already established into the units the interface renders, without
touching any model backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    CONTRADICT,
    REL_CONTRADICTION,
    REL_EQUAL,
    REL_NEUTRAL,
    REL_SUPPORT,
    SUPPORT,
    VALID,
    AnswerCluster,
    ClaimVerification,
    GenerationSample,
    VerificationResult,
)
from .errors import SpanError, UnknownTargetError, ValidationError

COUNT_KEYS = ("support", "contradiction", "neutral", "absent")


@dataclass(frozen=True)
class AnnotationSource:
    """What anchored an annotation: an atomic claim or a brushed span."""

    kind: str
    claim_id: str | None = None
    sentence_index: int | None = None
    start: int | None = None
    end: int | None = None

    def __post_init__(self):
        if self.kind not in ("claim", "brush"):
            raise ValidationError(f"unknown annotation source kind {self.kind!r}")


@dataclass(frozen=True)
class AnnotationOption:
    """One alternative-answer cluster as shown in an annotation's option list."""

    cluster_id: str
    representative_text: str
    relation: str
    size: int


@dataclass(frozen=True)
class KeywordAnnotation:
    """An in-text keyword with how the additional samples voted on it.

    The span indexes the focal answer within the presented text. The counts
    partition the additional samples: a sample whose valid answer sits in an
    equal or support cluster counts as support, contradiction and neutral
    follow their cluster relation, and samples with filtered or missing
    answers count as absent. Options list every cluster, largest first,
    creation order breaking ties.
    """

    id: str
    source: AnnotationSource
    start: int
    end: int
    counts: dict = field(default_factory=dict)
    options: tuple[AnnotationOption, ...] = ()

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValidationError(f"degenerate annotation span ({self.start}, {self.end})")
        if sorted(self.counts) != sorted(COUNT_KEYS):
            raise ValidationError(f"annotation counts must have keys {COUNT_KEYS}")


def _cluster_of(clusters: tuple[AnswerCluster, ...], sample_index: int) -> AnswerCluster | None:
    for cluster in clusters:
        if sample_index in cluster.member_indices:
            return cluster
    return None


def _relation_to_count_key(relation: str | None) -> str:
    if relation in (REL_EQUAL, REL_SUPPORT):
        return "support"
    if relation == REL_CONTRADICTION:
        return "contradiction"
    if relation == REL_NEUTRAL:
        return "neutral"
    raise ValidationError(f"cluster has no usable relation: {relation!r}")


def build_annotation(
    verification: ClaimVerification,
    n_additional: int,
    source: AnnotationSource | None = None,
    annotation_id: str | None = None,
) -> KeywordAnnotation | None:
    """Anchor a claim verification to its focal span and tally the samples.

    Returns None when there is no valid focal span to anchor to (the caller
    records an annotation-skipped marker). The four counts always sum to the
    number of additional samples.
    """
    focal = verification.focal_answer
    if focal is None or focal.status != VALID or focal.start is None:
        return None
    counts = {key: 0 for key in COUNT_KEYS}
    for sample_index in range(1, n_additional + 1):
        record = verification.answers[sample_index]
        if record.status == VALID:
            cluster = _cluster_of(verification.clusters, sample_index)
            if cluster is None:
                raise ValidationError(
                    f"valid answer for sample {sample_index} belongs to no cluster"
                )
            counts[_relation_to_count_key(cluster.relation)] += 1
        else:
            counts["absent"] += 1
    options = tuple(
        AnnotationOption(
            cluster_id=cluster.id,
            representative_text=cluster.representative_text,
            relation=cluster.relation or REL_NEUTRAL,
            size=cluster.size,
        )
        for cluster in sorted(verification.clusters, key=lambda c: -c.size)
    )
    if source is None:
        source = AnnotationSource(kind="claim", claim_id=verification.claim.id)
    return KeywordAnnotation(
        id=annotation_id or f"ann:{verification.claim.id}",
        source=source,
        start=focal.start,
        end=focal.end,
        counts=counts,
        options=options,
    )


@dataclass(frozen=True)
class ClaimRow:
    """One claim's support tallies for the sentence-scoped claim list."""

    claim_id: str
    text: str
    sentence_index: int
    counts: dict

    def __post_init__(self):
        if sorted(self.counts) != ["contradict", "neutral", "support"]:
            raise ValidationError("claim row counts must have support/contradict/neutral keys")


def claims_for_sentence(result: VerificationResult, sentence_index: int) -> list[ClaimRow]:
    """Rows for exactly the claims decomposed from the given sentence."""
    if not 0 <= sentence_index < len(result.presented.sentences):
        raise SpanError(
            f"sentence index {sentence_index} outside presented range "
            f"[0, {len(result.presented.sentences)})"
        )
    rows = []
    for verification in result.claim_verifications:
        if verification.claim.sentence_index != sentence_index:
            continue
        labels = verification.per_sample_labels
        rows.append(
            ClaimRow(
                claim_id=verification.claim.id,
                text=verification.claim.text,
                sentence_index=sentence_index,
                counts={
                    "support": labels.count(SUPPORT),
                    "contradict": labels.count(CONTRADICT),
                    "neutral": len(labels) - labels.count(SUPPORT) - labels.count(CONTRADICT),
                },
            )
        )
    return rows


@dataclass(frozen=True)
class EvidenceItem:
    """One highlighted passage: a sentence, optionally with an answer span."""

    sample_index: int
    sentence_index: int
    sentence_start: int
    sentence_end: int
    answer_start: int | None = None
    answer_end: int | None = None
    polarity: str | None = None

    def __post_init__(self):
        if self.polarity not in (None, "support", "contradiction"):
            raise ValidationError(f"unknown polarity {self.polarity!r}")


@dataclass(frozen=True)
class EvidenceSet:
    target: str
    items: tuple[EvidenceItem, ...]


def _enclosing_sentence(sample: GenerationSample, position: int):
    for span in sample.sentences:
        if span.start <= position < span.end:
            return span
    for span in sample.sentences:
        if position < span.end:
            return span
    if sample.sentences:
        return sample.sentences[-1]
    raise ValidationError(f"sample {sample.index} has no sentences to anchor evidence")


def _cluster_polarity(relation: str | None) -> str | None:
    if relation in (REL_EQUAL, REL_SUPPORT):
        return "support"
    if relation == REL_CONTRADICTION:
        return "contradiction"
    return None


def _cluster_items(
    result: VerificationResult,
    verification: ClaimVerification,
    cluster: AnswerCluster,
) -> list[EvidenceItem]:
    items = []
    polarity = _cluster_polarity(cluster.relation)
    for sample_index in cluster.member_indices:
        record = verification.answers[sample_index]
        span = _enclosing_sentence(result.samples[sample_index], record.start or 0)
        items.append(
            EvidenceItem(
                sample_index=sample_index,
                sentence_index=span.index,
                sentence_start=span.start,
                sentence_end=span.end,
                answer_start=record.start,
                answer_end=record.end,
                polarity=polarity,
            )
        )
    return items


def evidence_for_cluster(
    result: VerificationResult,
    cluster_id: str,
    extra_verifications: tuple[ClaimVerification, ...] = (),
) -> EvidenceSet:
    """Project a cluster onto its member samples' passages.

    Equal and support clusters highlight as support, contradiction clusters
    as contradiction; neutral clusters yield items with answer spans but no
    polarity.
    """
    for verification in tuple(result.claim_verifications) + tuple(extra_verifications):
        for cluster in verification.clusters:
            if cluster.id == cluster_id:
                items = _cluster_items(result, verification, cluster)
                return EvidenceSet(target=f"cluster:{cluster_id}", items=tuple(items))
    raise UnknownTargetError(f"no cluster with id {cluster_id!r}")


def evidence_for_claim(
    result: VerificationResult,
    claim_id: str,
    extra_verifications: tuple[ClaimVerification, ...] = (),
) -> EvidenceSet:
    """Union of the claim's non-neutral clusters and its per-sample verdicts.

    Cluster members contribute answer spans; support and contradict sample
    labels contribute their deciding sentences. Items agreeing on sample,
    sentence, and polarity merge, keeping the answer span when one exists.
    """
    candidates = tuple(result.claim_verifications) + tuple(extra_verifications)
    verification = next((v for v in candidates if v.claim.id == claim_id), None)
    if verification is None:
        raise UnknownTargetError(f"no claim with id {claim_id!r}")

    merged: dict[tuple, EvidenceItem] = {}

    def add(item: EvidenceItem) -> None:
        key = (item.sample_index, item.sentence_start, item.sentence_end, item.polarity)
        existing = merged.get(key)
        if existing is None or (existing.answer_start is None and item.answer_start is not None):
            merged[key] = item

    for cluster in verification.clusters:
        if cluster.relation == REL_NEUTRAL:
            continue
        for item in _cluster_items(result, verification, cluster):
            add(item)

    for offset, (label, sentence_index) in enumerate(
        zip(verification.per_sample_labels, verification.per_sample_sentences), start=1
    ):
        if label not in (SUPPORT, CONTRADICT) or sentence_index is None:
            continue
        sample = result.samples[offset]
        span = sample.sentences[sentence_index]
        add(
            EvidenceItem(
                sample_index=offset,
                sentence_index=span.index,
                sentence_start=span.start,
                sentence_end=span.end,
                polarity="support" if label == SUPPORT else "contradiction",
            )
        )

    items = sorted(
        merged.values(),
        key=lambda i: (i.sample_index, i.sentence_start, i.answer_start if i.answer_start is not None else -1),
    )
    return EvidenceSet(target=f"claim:{claim_id}", items=tuple(items))


__all__ = [
    "AnnotationOption",
    "AnnotationSource",
    "ClaimRow",
    "EvidenceItem",
    "EvidenceSet",
    "KeywordAnnotation",
    "build_annotation",
    "claims_for_sentence",
    "evidence_for_claim",
    "evidence_for_cluster",
]
