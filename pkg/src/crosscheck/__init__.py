"""Verify a language-model response against resampled peer responses.

The package verifies one presented response against additional samples for
the same prompt: sentences are decomposed into atomic claims, each claim is
turned into a question, answers extracted from every sample are filtered,
clustered, and related back to the claim, and each claim receives a
consistency score. Sessions expose the same machinery over HTTP with
brushing, editing, and evidence projection.
"""

from .annotations import (
    AnnotationOption,
    AnnotationSource,
    ClaimRow,
    EvidenceItem,
    EvidenceSet,
    KeywordAnnotation,
    build_annotation,
    claims_for_sentence,
    evidence_for_claim,
    evidence_for_cluster,
)
from .core import (
    AnswerCluster,
    AnswerRecord,
    ClaimVerification,
    GenerationSample,
    UnverifiedMarker,
    VerificationResult,
    claim_support_label,
    classify_cluster,
    cluster_answers,
    collect_answers,
    consistency_score,
    contextualize,
    filter_answer,
    verify_claim,
    verify_generation,
)
from .errors import (
    BackendError,
    CrosscheckError,
    DuplicateFixtureKeyError,
    EmptyDecompositionError,
    FixtureParseError,
    FixtureUnderflowError,
    MalformedQuestionError,
    MissingCredentialError,
    MissingFixtureEntryError,
    SessionNotFoundError,
    SpanError,
    TransportError,
    UndefinedMetricError,
    UndefinedScoreError,
    UnknownTargetError,
    ValidationError,
)
from .evaluation import (
    LabeledClaim,
    LabeledGeneration,
    auroc,
    build_report,
    load_dataset,
    score_dataset,
    sweep_sample_size,
    synthesize_fixture_dataset,
)
from .gateway import (
    Backend,
    BackendConfig,
    EntailmentLabel,
    FixtureBackend,
    FixtureTable,
    Gateway,
    HttpBackend,
    QAResult,
    fixture_from_dict,
    fixture_gateway,
    load_fixture,
    render_template,
)
from .session import SessionManager, SessionStore, VerificationSession
from .textunits import (
    AtomicClaim,
    Question,
    QuestionSource,
    SentenceSpan,
    claim_id,
    decompose_claims,
    question_from_claim,
    question_from_span,
    segment_sentences,
    validate_question,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationOption",
    "AnnotationSource",
    "AnswerCluster",
    "AnswerRecord",
    "AtomicClaim",
    "Backend",
    "BackendConfig",
    "BackendError",
    "ClaimRow",
    "ClaimVerification",
    "CrosscheckError",
    "DuplicateFixtureKeyError",
    "EmptyDecompositionError",
    "EntailmentLabel",
    "EvidenceItem",
    "EvidenceSet",
    "FixtureBackend",
    "FixtureParseError",
    "FixtureTable",
    "FixtureUnderflowError",
    "Gateway",
    "GenerationSample",
    "HttpBackend",
    "KeywordAnnotation",
    "LabeledClaim",
    "LabeledGeneration",
    "MalformedQuestionError",
    "MissingCredentialError",
    "MissingFixtureEntryError",
    "QAResult",
    "Question",
    "QuestionSource",
    "SentenceSpan",
    "SessionManager",
    "SessionNotFoundError",
    "SessionStore",
    "SpanError",
    "TransportError",
    "UndefinedMetricError",
    "UndefinedScoreError",
    "UnknownTargetError",
    "UnverifiedMarker",
    "ValidationError",
    "VerificationResult",
    "VerificationSession",
    "auroc",
    "build_annotation",
    "build_report",
    "claim_id",
    "claim_support_label",
    "claims_for_sentence",
    "classify_cluster",
    "cluster_answers",
    "collect_answers",
    "consistency_score",
    "contextualize",
    "decompose_claims",
    "evidence_for_claim",
    "evidence_for_cluster",
    "filter_answer",
    "fixture_from_dict",
    "fixture_gateway",
    "load_dataset",
    "load_fixture",
    "question_from_claim",
    "question_from_span",
    "render_template",
    "score_dataset",
    "segment_sentences",
    "sweep_sample_size",
    "synthesize_fixture_dataset",
    "validate_question",
    "verify_claim",
    "verify_generation",
    "__version__",
]
