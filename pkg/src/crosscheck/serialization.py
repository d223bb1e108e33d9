"""Lossless JSON mapping for verification types.

Serialization is canonical: keys sorted, UTF-8 kept unescaped, two-space
indent, trailing newline. Serialize -> parse -> serialize is byte-identical,
which is what session persistence and the determinism checks rely on.
"""

from __future__ import annotations

import json

from .annotations import (
    AnnotationOption,
    AnnotationSource,
    EvidenceItem,
    EvidenceSet,
    KeywordAnnotation,
)
from .core import (
    AnswerCluster,
    AnswerRecord,
    ClaimVerification,
    GenerationSample,
    UnverifiedMarker,
    VerificationResult,
)
from .textunits import AtomicClaim, Question, QuestionSource, SentenceSpan


def canonical_json(payload: object) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def span_to_dict(span: SentenceSpan) -> dict:
    return {"index": span.index, "start": span.start, "end": span.end}


def span_from_dict(data: dict) -> SentenceSpan:
    return SentenceSpan(index=data["index"], start=data["start"], end=data["end"])


def sample_to_dict(sample: GenerationSample) -> dict:
    return {
        "index": sample.index,
        "text": sample.text,
        "sentences": [span_to_dict(s) for s in sample.sentences],
    }


def sample_from_dict(data: dict) -> GenerationSample:
    return GenerationSample(
        index=data["index"],
        text=data["text"],
        sentences=tuple(span_from_dict(s) for s in data["sentences"]),
    )


def claim_to_dict(claim: AtomicClaim) -> dict:
    return {
        "id": claim.id,
        "text": claim.text,
        "sentence_index": claim.sentence_index,
        "ordinal": claim.ordinal,
    }


def claim_from_dict(data: dict) -> AtomicClaim:
    return AtomicClaim(
        id=data["id"],
        text=data["text"],
        sentence_index=data["sentence_index"],
        ordinal=data["ordinal"],
    )


def question_to_dict(question: Question) -> dict:
    source = question.source
    return {
        "text": question.text,
        "validated": question.validated,
        "source": {
            "kind": source.kind,
            "claim_id": source.claim_id,
            "sentence_index": source.sentence_index,
            "start": source.start,
            "end": source.end,
        },
    }


def question_from_dict(data: dict) -> Question:
    src = data["source"]
    return Question(
        text=data["text"],
        validated=data["validated"],
        source=QuestionSource(
            kind=src["kind"],
            claim_id=src.get("claim_id"),
            sentence_index=src.get("sentence_index"),
            start=src.get("start"),
            end=src.get("end"),
        ),
    )


def answer_to_dict(record: AnswerRecord) -> dict:
    return {
        "sample_index": record.sample_index,
        "status": record.status,
        "text": record.text,
        "start": record.start,
        "end": record.end,
        "qa_confidence": record.qa_confidence,
    }


def answer_from_dict(data: dict) -> AnswerRecord:
    return AnswerRecord(
        sample_index=data["sample_index"],
        status=data["status"],
        text=data["text"],
        start=data["start"],
        end=data["end"],
        qa_confidence=data["qa_confidence"],
    )


def cluster_to_dict(cluster: AnswerCluster) -> dict:
    return {
        "id": cluster.id,
        "member_indices": list(cluster.member_indices),
        "representative_text": cluster.representative_text,
        "relation": cluster.relation,
        "size": cluster.size,
    }


def cluster_from_dict(data: dict) -> AnswerCluster:
    return AnswerCluster(
        id=data["id"],
        member_indices=tuple(data["member_indices"]),
        representative_text=data["representative_text"],
        relation=data["relation"],
    )


def verification_to_dict(verification: ClaimVerification) -> dict:
    return {
        "claim": claim_to_dict(verification.claim),
        "status": verification.status,
        "question": question_to_dict(verification.question) if verification.question else None,
        "focal_answer": answer_to_dict(verification.focal_answer)
        if verification.focal_answer
        else None,
        "answers": [answer_to_dict(a) for a in verification.answers],
        "clusters": [cluster_to_dict(c) for c in verification.clusters],
        "per_sample_labels": list(verification.per_sample_labels),
        "per_sample_sentences": list(verification.per_sample_sentences),
        "consistency_score": verification.consistency_score,
    }


def verification_from_dict(data: dict) -> ClaimVerification:
    return ClaimVerification(
        claim=claim_from_dict(data["claim"]),
        status=data["status"],
        question=question_from_dict(data["question"]) if data["question"] else None,
        focal_answer=answer_from_dict(data["focal_answer"]) if data["focal_answer"] else None,
        answers=tuple(answer_from_dict(a) for a in data["answers"]),
        clusters=tuple(cluster_from_dict(c) for c in data["clusters"]),
        per_sample_labels=tuple(data["per_sample_labels"]),
        per_sample_sentences=tuple(data["per_sample_sentences"]),
        consistency_score=data["consistency_score"],
    )


def marker_to_dict(marker: UnverifiedMarker) -> dict:
    return {
        "sentence_index": marker.sentence_index,
        "reason": marker.reason,
        "claim_id": marker.claim_id,
        "claim_text": marker.claim_text,
    }


def marker_from_dict(data: dict) -> UnverifiedMarker:
    return UnverifiedMarker(
        sentence_index=data["sentence_index"],
        reason=data["reason"],
        claim_id=data.get("claim_id"),
        claim_text=data.get("claim_text"),
    )


def result_to_dict(result: VerificationResult) -> dict:
    return {
        "samples": [sample_to_dict(s) for s in result.samples],
        "claim_verifications": [verification_to_dict(v) for v in result.claim_verifications],
        "unverified": [marker_to_dict(m) for m in result.unverified],
        "config": result.config,
    }


def result_from_dict(data: dict) -> VerificationResult:
    return VerificationResult(
        samples=tuple(sample_from_dict(s) for s in data["samples"]),
        claim_verifications=tuple(
            verification_from_dict(v) for v in data["claim_verifications"]
        ),
        unverified=tuple(marker_from_dict(m) for m in data["unverified"]),
        config=data["config"],
    )


def annotation_to_dict(annotation: KeywordAnnotation) -> dict:
    source = annotation.source
    return {
        "id": annotation.id,
        "source": {
            "kind": source.kind,
            "claim_id": source.claim_id,
            "sentence_index": source.sentence_index,
            "start": source.start,
            "end": source.end,
        },
        "start": annotation.start,
        "end": annotation.end,
        "counts": dict(annotation.counts),
        "options": [
            {
                "cluster_id": o.cluster_id,
                "representative_text": o.representative_text,
                "relation": o.relation,
                "size": o.size,
            }
            for o in annotation.options
        ],
    }


def annotation_from_dict(data: dict) -> KeywordAnnotation:
    src = data["source"]
    return KeywordAnnotation(
        id=data["id"],
        source=AnnotationSource(
            kind=src["kind"],
            claim_id=src.get("claim_id"),
            sentence_index=src.get("sentence_index"),
            start=src.get("start"),
            end=src.get("end"),
        ),
        start=data["start"],
        end=data["end"],
        counts=dict(data["counts"]),
        options=tuple(
            AnnotationOption(
                cluster_id=o["cluster_id"],
                representative_text=o["representative_text"],
                relation=o["relation"],
                size=o["size"],
            )
            for o in data["options"]
        ),
    )


def evidence_to_dict(evidence: EvidenceSet) -> dict:
    return {
        "target": evidence.target,
        "items": [
            {
                "sample_index": i.sample_index,
                "sentence_index": i.sentence_index,
                "sentence_start": i.sentence_start,
                "sentence_end": i.sentence_end,
                "answer_start": i.answer_start,
                "answer_end": i.answer_end,
                "polarity": i.polarity,
            }
            for i in evidence.items
        ],
    }


def evidence_from_dict(data: dict) -> EvidenceSet:
    return EvidenceSet(
        target=data["target"],
        items=tuple(
            EvidenceItem(
                sample_index=i["sample_index"],
                sentence_index=i["sentence_index"],
                sentence_start=i["sentence_start"],
                sentence_end=i["sentence_end"],
                answer_start=i.get("answer_start"),
                answer_end=i.get("answer_end"),
                polarity=i.get("polarity"),
            )
            for i in data["items"]
        ),
    )
