"""Verification sessions: creation, brushing, editing, and persistence.

A session owns one verified response, its annotations, and an append-only
edit history. Sessions persist as one canonical JSON file each; loading and
re-serializing a session reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import logging
import os
import re
import secrets
import threading
import time
from dataclasses import dataclass, field, replace

from .annotations import (
    AnnotationSource,
    EvidenceSet,
    KeywordAnnotation,
    build_annotation,
    evidence_for_claim,
    evidence_for_cluster,
)
from .core import (
    STATUS_OK,
    SUPPORT,
    AnswerRecord,
    ClaimVerification,
    GenerationSample,
    UnverifiedMarker,
    VerificationResult,
    classify_cluster,
    cluster_answers,
    collect_answers,
    decompose_claims,
    filter_answer,
    verify_claim,
    verify_generation,
    _support_judgment,
)
from .errors import (
    BackendError,
    EmptyDecompositionError,
    SessionNotFoundError,
    SpanError,
    ValidationError,
)
from .gateway import Gateway
from .serialization import (
    annotation_from_dict,
    annotation_to_dict,
    canonical_json,
    result_from_dict,
    result_to_dict,
    verification_from_dict,
    verification_to_dict,
)
from .textunits import AtomicClaim, question_from_span, validate_question

log = logging.getLogger(__name__)

MIN_SAMPLES = 2
MAX_SAMPLES = 50

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass
class EditRecord:
    timestamp: float
    old_text: str
    new_text: str
    recomputed_claim_ids: list[str]


@dataclass
class VerificationSession:
    """The persistent state of one verified response."""

    session_id: str
    prompt: str
    num_samples: int
    backend_name: str
    result: VerificationResult
    annotations: list[KeywordAnnotation] = field(default_factory=list)
    skipped_annotations: list[str] = field(default_factory=list)
    brush_verifications: list[ClaimVerification] = field(default_factory=list)
    edit_history: list[EditRecord] = field(default_factory=list)
    cache_stats: dict = field(default_factory=dict)
    brush_sequence: int = 0

    def to_payload(self) -> dict:
        return {
            "session_id": self.session_id,
            "prompt": self.prompt,
            "num_samples": self.num_samples,
            "backend": self.backend_name,
            "result": result_to_dict(self.result),
            "annotations": [annotation_to_dict(a) for a in self.annotations],
            "skipped_annotations": list(self.skipped_annotations),
            "brush_verifications": [verification_to_dict(v) for v in self.brush_verifications],
            "edit_history": [
                {
                    "timestamp": record.timestamp,
                    "old_text": record.old_text,
                    "new_text": record.new_text,
                    "recomputed_claim_ids": list(record.recomputed_claim_ids),
                }
                for record in self.edit_history
            ],
            "cache_stats": self.cache_stats,
            "brush_sequence": self.brush_sequence,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "VerificationSession":
        return cls(
            session_id=payload["session_id"],
            prompt=payload["prompt"],
            num_samples=payload["num_samples"],
            backend_name=payload["backend"],
            result=result_from_dict(payload["result"]),
            annotations=[annotation_from_dict(a) for a in payload["annotations"]],
            skipped_annotations=list(payload["skipped_annotations"]),
            brush_verifications=[
                verification_from_dict(v) for v in payload["brush_verifications"]
            ],
            edit_history=[
                EditRecord(
                    timestamp=r["timestamp"],
                    old_text=r["old_text"],
                    new_text=r["new_text"],
                    recomputed_claim_ids=list(r["recomputed_claim_ids"]),
                )
                for r in payload["edit_history"]
            ],
            cache_stats=payload["cache_stats"],
            brush_sequence=payload.get("brush_sequence", 0),
        )


class SessionStore:
    """One JSON file per session under a writable directory."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = str(directory)
        os.makedirs(self.directory, exist_ok=True)
        if not os.access(self.directory, os.W_OK):
            raise ValidationError(f"session store {self.directory} is not writable")

    def _path(self, session_id: str) -> str:
        if not _SESSION_ID_RE.match(session_id):
            raise SessionNotFoundError(f"malformed session id {session_id!r}")
        return os.path.join(self.directory, f"{session_id}.json")

    def save(self, session: VerificationSession) -> None:
        path = self._path(session.session_id)
        data = canonical_json(session.to_payload())
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)

    def load(self, session_id: str) -> VerificationSession:
        path = self._path(session_id)
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except FileNotFoundError:
            raise SessionNotFoundError(f"no session {session_id!r}") from None
        return VerificationSession.from_payload(payload)

    def exists(self, session_id: str) -> bool:
        return os.path.exists(self._path(session_id))


def build_claim_annotations(
    result: VerificationResult,
) -> tuple[list[KeywordAnnotation], list[str]]:
    """Annotations for every claim that has a usable focal span.

    Claims without one (degraded pipelines, filtered focal answers) land in
    the skipped list so they are never silently dropped.
    """
    annotations: list[KeywordAnnotation] = []
    skipped: list[str] = []
    for verification in result.claim_verifications:
        annotation = build_annotation(verification, result.additional_count)
        if annotation is None:
            skipped.append(verification.claim.id)
        else:
            annotations.append(annotation)
    return annotations, skipped


def _merge_stats(base: dict, live: dict) -> dict:
    merged: dict = {"calls": {}, "cache_hits": {}}
    for section in ("calls", "cache_hits"):
        keys = set(base.get(section, {})) | set(live.get(section, {}))
        for key in sorted(keys):
            merged[section][key] = base.get(section, {}).get(key, 0) + live.get(
                section, {}
            ).get(key, 0)
    return merged


@dataclass
class _Entry:
    session: VerificationSession
    gateway: Gateway
    base_stats: dict
    pending_brushes: dict = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)


class SessionManager:
    """Owns live sessions, their gateways, and the store underneath.

    Mutations on one session are serialized by a per-session lock; distinct
    sessions proceed concurrently.
    """

    def __init__(self, store: SessionStore, backend_factory, max_workers: int = 4):
        self._store = store
        self._backend_factory = backend_factory
        self._max_workers = max_workers
        self._entries: dict[str, _Entry] = {}
        self._lock = threading.Lock()

    def _snapshot_stats(self, entry: _Entry) -> None:
        entry.session.cache_stats = _merge_stats(entry.base_stats, entry.gateway.stats.as_dict())

    def _entry(self, session_id: str) -> _Entry:
        with self._lock:
            entry = self._entries.get(session_id)
        if entry is not None:
            return entry
        session = self._store.load(session_id)
        backend, config = self._backend_factory(session.backend_name)
        entry = _Entry(
            session=session,
            gateway=Gateway(backend, config),
            base_stats=session.cache_stats or {},
        )
        with self._lock:
            return self._entries.setdefault(session_id, entry)

    def create_session(
        self, prompt: str, num_samples: int = 20, backend_name: str | None = None
    ) -> VerificationSession:
        if not prompt or not prompt.strip():
            raise ValidationError("prompt must be non-empty")
        if not MIN_SAMPLES <= num_samples <= MAX_SAMPLES:
            raise ValidationError(
                f"num_samples must be within [{MIN_SAMPLES}, {MAX_SAMPLES}]"
            )
        backend, config = self._backend_factory(backend_name)
        gateway = Gateway(backend, config)
        result = verify_generation(prompt, num_samples, gateway, self._max_workers)
        annotations, skipped = build_claim_annotations(result)
        session = VerificationSession(
            session_id=secrets.token_urlsafe(12),
            prompt=prompt,
            num_samples=num_samples,
            backend_name=backend.name,
            result=result,
            annotations=annotations,
            skipped_annotations=skipped,
        )
        entry = _Entry(session=session, gateway=gateway, base_stats={})
        self._snapshot_stats(entry)
        with self._lock:
            self._entries[session.session_id] = entry
        self._store.save(session)
        return session

    def get_session(self, session_id: str) -> VerificationSession:
        entry = self._entry(session_id)
        with entry.lock:
            return entry.session

    def suggest_brush(
        self, session_id: str, sentence_index: int, start: int, end: int
    ) -> tuple[str, str]:
        """Phase one of brushing: generate a question for the selected words."""
        entry = self._entry(session_id)
        with entry.lock:
            presented = entry.session.result.presented
            if not 0 <= sentence_index < len(presented.sentences):
                raise SpanError(f"sentence index {sentence_index} out of range")
            span = presented.sentences[sentence_index]
            sentence = presented.sentence(span)
            question = question_from_span(
                sentence, start, end, entry.gateway, sentence_index=sentence_index
            )
            token = secrets.token_urlsafe(8)
            entry.pending_brushes[token] = {
                "question": question,
                "sentence_index": sentence_index,
                "start": start,
                "end": end,
            }
            self._snapshot_stats(entry)
            self._store.save(entry.session)
            return question.text, token

    def confirm_brush(self, session_id: str, token: str) -> KeywordAnnotation:
        """Phase two: verify the brushed span against every sample."""
        entry = self._entry(session_id)
        with entry.lock:
            pending = entry.pending_brushes.pop(token, None)
            if pending is None:
                raise ValidationError(f"unknown brush token {token!r}")
            session = entry.session
            gateway = entry.gateway
            result = session.result
            presented = result.presented
            span = presented.sentences[pending["sentence_index"]]
            sentence = presented.sentence(span)

            session.brush_sequence += 1
            pseudo = AtomicClaim(
                id=f"brush{session.brush_sequence}",
                text=sentence,
                sentence_index=pending["sentence_index"],
                ordinal=0,
            )
            question, _ = validate_question(pending["question"], presented.text, gateway)
            if not question.validated:
                entry.pending_brushes[token] = pending
                session.brush_sequence -= 1
                raise BackendError(
                    "suggested question found no answer in the presented text"
                )
            judgments = [_support_judgment(s, pseudo, gateway) for s in result.samples[1:]]
            answers = collect_answers(question, [s.text for s in result.samples], gateway)
            answers = [
                filter_answer(presented.text, pseudo, question, record, gateway)
                for record in answers
            ]
            clusters = cluster_answers(question, answers, gateway, id_prefix=f"{pseudo.id}:")
            clusters = [
                replace(c, relation=classify_cluster(c, pseudo, question, gateway))
                for c in clusters
            ]
            verification = ClaimVerification(
                claim=pseudo,
                status=STATUS_OK,
                question=question,
                focal_answer=answers[0],
                answers=tuple(answers),
                clusters=tuple(clusters),
                per_sample_labels=tuple(j[0] for j in judgments),
                per_sample_sentences=tuple(j[1] for j in judgments),
                consistency_score=[j[0] for j in judgments].count(SUPPORT)
                / max(1, len(judgments)),
            )
            annotation = build_annotation(
                verification,
                result.additional_count,
                source=AnnotationSource(
                    kind="brush",
                    sentence_index=pending["sentence_index"],
                    start=pending["start"],
                    end=pending["end"],
                ),
                annotation_id=f"ann:{pseudo.id}",
            )
            if annotation is None:
                session.brush_sequence -= 1
                raise BackendError("brushed span produced no anchorable focal answer")
            session.brush_verifications.append(verification)
            session.annotations.append(annotation)
            self._snapshot_stats(entry)
            self._store.save(session)
            return annotation

    def apply_edit(self, session_id: str, new_text: str) -> VerificationSession:
        """Replace the presented text, recomputing only what actually changed.

        Sentences whose text matches a previous sentence keep their claim
        verifications (spans shifted, no model calls); new or altered
        sentences run the full per-claim pipeline against the existing
        samples, which are never regenerated. The swap is all-or-nothing.
        """
        if not new_text or not new_text.strip():
            raise ValidationError("edited text must be non-empty")
        entry = self._entry(session_id)
        with entry.lock:
            session = entry.session
            gateway = entry.gateway
            old_result = session.result
            old_presented = old_result.presented
            new_presented = GenerationSample.from_text(0, new_text)
            samples = (new_presented,) + tuple(old_result.samples[1:])
            sample_list = list(samples)

            old_spans = {span.index: span for span in old_presented.sentences}
            claims_by_sentence: dict[int, list[ClaimVerification]] = {}
            for verification in old_result.claim_verifications:
                claims_by_sentence.setdefault(verification.claim.sentence_index, []).append(
                    verification
                )
            sentence_markers: dict[int, list[UnverifiedMarker]] = {}
            for marker in old_result.unverified:
                if marker.claim_id is None:
                    sentence_markers.setdefault(marker.sentence_index, []).append(marker)

            unconsumed: dict[str, list[int]] = {}
            for span in old_presented.sentences:
                unconsumed.setdefault(old_presented.sentence(span), []).append(span.index)

            new_verifications: list[ClaimVerification] = []
            new_markers: list[UnverifiedMarker] = []
            recomputed: list[str] = []
            sentence_remap: dict[int, tuple[int, int]] = {}

            for span in new_presented.sentences:
                text = new_presented.sentence(span)
                candidates = unconsumed.get(text, [])
                reused = False
                if candidates:
                    old_index = candidates.pop(0)
                    old_span = old_spans[old_index]
                    delta = span.start - old_span.start
                    remapped, ok = _remap_sentence(
                        claims_by_sentence.get(old_index, []), span.index, delta, old_span
                    )
                    if ok:
                        new_verifications.extend(remapped)
                        for marker in sentence_markers.get(old_index, []):
                            new_markers.append(replace(marker, sentence_index=span.index))
                        sentence_remap[old_index] = (span.index, delta)
                        reused = True
                    else:
                        candidates.insert(0, old_index)
                if not reused:
                    try:
                        claims = decompose_claims(text, gateway, span.index)
                    except EmptyDecompositionError as exc:
                        new_markers.append(
                            UnverifiedMarker(
                                sentence_index=span.index,
                                reason=f"empty decomposition: {exc}",
                            )
                        )
                        continue
                    for claim in claims:
                        verification, marker = verify_claim(claim, sample_list, gateway)
                        new_verifications.append(verification)
                        if marker is not None:
                            new_markers.append(marker)
                        recomputed.append(claim.id)

            claim_markers = [
                UnverifiedMarker(
                    sentence_index=v.claim.sentence_index,
                    reason=f"claim degraded: {v.status}",
                    claim_id=v.claim.id,
                    claim_text=v.claim.text,
                )
                for v in new_verifications
                if v.status != STATUS_OK and v.claim.id not in {m.claim_id for m in new_markers}
            ]
            all_markers = sorted(
                new_markers + claim_markers,
                key=lambda m: (m.sentence_index, m.claim_id or ""),
            )
            new_result = VerificationResult(
                samples=samples,
                claim_verifications=tuple(new_verifications),
                unverified=tuple(all_markers),
                config=old_result.config,
            )
            annotations, skipped = build_claim_annotations(new_result)
            brush_kept: list[ClaimVerification] = []
            for verification in session.brush_verifications:
                mapped = _remap_brush(verification, sentence_remap, old_spans)
                if mapped is not None:
                    brush_kept.append(mapped)
            for verification in brush_kept:
                annotation = build_annotation(
                    verification,
                    new_result.additional_count,
                    source=AnnotationSource(
                        kind="brush",
                        sentence_index=verification.claim.sentence_index,
                        start=verification.question.source.start,
                        end=verification.question.source.end,
                    ),
                    annotation_id=f"ann:{verification.claim.id}",
                )
                if annotation is not None:
                    annotations.append(annotation)

            session.result = new_result
            session.annotations = annotations
            session.skipped_annotations = skipped
            session.brush_verifications = brush_kept
            entry.pending_brushes.clear()
            session.edit_history.append(
                EditRecord(
                    timestamp=time.time(),
                    old_text=old_presented.text,
                    new_text=new_text,
                    recomputed_claim_ids=recomputed,
                )
            )
            self._snapshot_stats(entry)
            self._store.save(session)
            return session

    def evidence(self, session_id: str, target: str) -> EvidenceSet:
        entry = self._entry(session_id)
        with entry.lock:
            session = entry.session
            kind, _, identifier = target.partition(":")
            if not identifier or kind not in ("cluster", "claim"):
                raise ValidationError(
                    f"evidence target must look like cluster:<id> or claim:<id>, got {target!r}"
                )
            extra = tuple(session.brush_verifications)
            if kind == "cluster":
                return evidence_for_cluster(session.result, identifier, extra)
            return evidence_for_claim(session.result, identifier, extra)


def _remap_answer(record: AnswerRecord, delta: int) -> AnswerRecord:
    if record.start is None:
        return record
    return replace(record, start=record.start + delta, end=record.end + delta)


def _remap_sentence(
    verifications: list[ClaimVerification], new_index: int, delta: int, old_span
) -> tuple[list[ClaimVerification], bool]:
    """Shift one sentence's verifications to a new position.

    Returns ok=False when any presented-text span falls outside the old
    sentence, in which case the caller recomputes instead of reusing.
    """
    remapped = []
    for verification in verifications:
        for record in (verification.focal_answer, *verification.answers[:1]):
            if record is not None and record.start is not None:
                if not (old_span.start <= record.start and record.end <= old_span.end):
                    return [], False
        answers = tuple(
            _remap_answer(record, delta) if record.sample_index == 0 else record
            for record in verification.answers
        )
        focal = (
            _remap_answer(verification.focal_answer, delta)
            if verification.focal_answer is not None
            else None
        )
        remapped.append(
            replace(
                verification,
                claim=replace(verification.claim, sentence_index=new_index),
                focal_answer=focal,
                answers=answers,
            )
        )
    return remapped, True


def _remap_brush(
    verification: ClaimVerification,
    sentence_remap: dict[int, tuple[int, int]],
    old_spans: dict,
) -> ClaimVerification | None:
    """Carry a brush verification across an edit, or drop it with its sentence."""
    old_index = verification.claim.sentence_index
    mapping = sentence_remap.get(old_index)
    if mapping is None:
        return None
    new_index, delta = mapping
    old_span = old_spans[old_index]
    focal = verification.focal_answer
    if focal is not None and focal.start is not None:
        if not (old_span.start <= focal.start and focal.end <= old_span.end):
            return None
    answers = tuple(
        _remap_answer(record, delta) if record.sample_index == 0 else record
        for record in verification.answers
    )
    question = verification.question
    if question is not None and question.source.kind == "from_span":
        question = replace(
            question, source=replace(question.source, sentence_index=new_index)
        )
    return replace(
        verification,
        claim=replace(verification.claim, sentence_index=new_index),
        question=question,
        focal_answer=_remap_answer(focal, delta) if focal is not None else None,
        answers=answers,
    )
