"""Benchmark harness: labeled datasets, scoring, AUROC, and synthetic data.

A dataset is JSONL, one generation per line, each carrying human labels for
its claims: S (supported), NS (not supported), or IR (irrelevant). IR claims
are dropped at load time. Scoring replays the consistency score against the
record's own additional samples and reports how well the score separates S
from NS claims.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import GenerationSample, consistency_score
from .errors import (
    BackendError,
    UndefinedMetricError,
    UndefinedScoreError,
    ValidationError,
)
from .gateway import ENTAILMENT, Gateway, NEUTRAL
from .textunits import AtomicClaim, claim_id

log = logging.getLogger(__name__)

LABEL_SUPPORTED = "S"
LABEL_NOT_SUPPORTED = "NS"
LABEL_IRRELEVANT = "IR"
CLAIM_LABELS = (LABEL_SUPPORTED, LABEL_NOT_SUPPORTED, LABEL_IRRELEVANT)

# Observed per-class mean scores used as planting rates for synthetic data.
DEFAULT_S_RATE = 0.564
DEFAULT_NS_RATE = 0.156


@dataclass(frozen=True)
class LabeledClaim:
    text: str
    label: str

    def __post_init__(self):
        if not self.text:
            raise ValidationError("labeled claim text must be non-empty")
        if self.label not in (LABEL_SUPPORTED, LABEL_NOT_SUPPORTED):
            raise ValidationError(f"unexpected claim label {self.label!r}")


@dataclass(frozen=True)
class LabeledGeneration:
    """One benchmark record: a generation, its labeled claims, and samples."""

    topic: str
    generation: str
    claims: tuple[LabeledClaim, ...]
    additional_samples: tuple[str, ...]
    model: str = ""

    def __post_init__(self):
        if not self.generation:
            raise ValidationError("generation text must be non-empty")
        if not self.claims:
            raise ValidationError("labeled generation carries no claims")


def load_dataset(path: str | os.PathLike) -> list[LabeledGeneration]:
    """Read a JSONL dataset, dropping IR claims and claimless records.

    Malformed lines raise with the line number so bad records can be found
    in large files.
    """
    generations: list[LabeledGeneration] = []
    dropped_ir = 0
    dropped_records = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ValidationError(f"{path}:{lineno}: record is not an object")
            for required in ("topic", "generation", "claims", "additional_samples"):
                if required not in record:
                    raise ValidationError(f"{path}:{lineno}: missing field {required!r}")
            claims: list[LabeledClaim] = []
            for i, raw in enumerate(record["claims"]):
                if not isinstance(raw, dict) or "text" not in raw or "label" not in raw:
                    raise ValidationError(
                        f"{path}:{lineno}: claims[{i}] must be an object with text and label"
                    )
                if raw["label"] not in CLAIM_LABELS:
                    raise ValidationError(
                        f"{path}:{lineno}: claims[{i}] has unknown label {raw['label']!r}"
                    )
                if raw["label"] == LABEL_IRRELEVANT:
                    dropped_ir += 1
                    continue
                claims.append(LabeledClaim(text=raw["text"], label=raw["label"]))
            samples = record["additional_samples"]
            if not isinstance(samples, list) or not all(isinstance(s, str) for s in samples):
                raise ValidationError(
                    f"{path}:{lineno}: additional_samples must be an array of strings"
                )
            if not claims:
                dropped_records += 1
                continue
            generations.append(
                LabeledGeneration(
                    topic=str(record["topic"]),
                    generation=str(record["generation"]),
                    claims=tuple(claims),
                    additional_samples=tuple(samples),
                    model=str(record.get("model", "")),
                )
            )
    if dropped_ir or dropped_records:
        log.info(
            "loaded %d generations (%d IR claims dropped, %d claimless records skipped)",
            len(generations),
            dropped_ir,
            dropped_records,
        )
    return generations


def auroc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """Area under the ROC curve via tie-averaged ranks.

    Equivalent to the probability that a uniformly random positive outscores
    a uniformly random negative, with ties counting half.
    """
    values = np.asarray(scores, dtype=float)
    mask = np.asarray(positives, dtype=bool)
    if values.shape != mask.shape:
        raise ValidationError("scores and labels must have equal length")
    n_pos = int(mask.sum())
    n_neg = int(values.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one positive and one negative")
    order = np.argsort(values, kind="mergesort")
    _, inverse, counts = np.unique(values[order], return_inverse=True, return_counts=True)
    # Mean rank of each tie group: last rank in group minus half its spread.
    group_mean = np.cumsum(counts) - (counts - 1) / 2.0
    ranks = np.empty(values.size, dtype=float)
    ranks[order] = group_mean[inverse]
    return float((ranks[mask].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class EvalRow:
    """One scored claim, carrying everything the aggregates are built from."""

    topic: str
    claim: str
    label: str
    score: float
    model: str = ""

    def as_dict(self) -> dict:
        return {
            "topic": self.topic,
            "claim": self.claim,
            "label": self.label,
            "score": self.score,
            "model": self.model,
        }


def _claim_object(text: str) -> AtomicClaim:
    return AtomicClaim(id=claim_id(text, 0), text=text, sentence_index=0, ordinal=0)


def score_generation(
    record: LabeledGeneration, n: int, gateway: Gateway
) -> tuple[list[EvalRow], list[dict]]:
    """Score every labeled claim of one record against its first n samples."""
    if n < 1:
        raise ValidationError("scoring needs at least one additional sample")
    if n > len(record.additional_samples):
        raise ValidationError(
            f"record {record.topic!r} has {len(record.additional_samples)} samples, {n} requested"
        )
    samples = [
        GenerationSample.from_text(i + 1, text)
        for i, text in enumerate(record.additional_samples[:n])
    ]
    rows: list[EvalRow] = []
    errors: list[dict] = []
    for labeled in record.claims:
        try:
            score = consistency_score(_claim_object(labeled.text), samples, gateway)
        except (BackendError, UndefinedScoreError) as exc:
            errors.append({"topic": record.topic, "claim": labeled.text, "error": str(exc)})
            continue
        rows.append(
            EvalRow(
                topic=record.topic,
                claim=labeled.text,
                label=labeled.label,
                score=score,
                model=record.model,
            )
        )
    return rows, errors


def score_dataset(
    dataset: Iterable[LabeledGeneration], n: int, gateway: Gateway
) -> tuple[list[EvalRow], list[dict]]:
    """Score a whole dataset; per-claim backend failures are recorded, not fatal."""
    rows: list[EvalRow] = []
    errors: list[dict] = []
    for record in dataset:
        record_rows, record_errors = score_generation(record, n, gateway)
        rows.extend(record_rows)
        errors.extend(record_errors)
    if errors:
        log.warning("%d claim(s) failed to score and were excluded", len(errors))
    return rows, errors


def _histogram(scores: list[float]) -> list[int]:
    counts, _ = np.histogram(np.asarray(scores, dtype=float), bins=10, range=(0.0, 1.0))
    return [int(c) for c in counts]


def build_report(rows: Sequence[EvalRow], errors: Sequence[dict] = (), n: int | None = None) -> dict:
    """Aggregate scored rows into a report.

    The report embeds the rows themselves, so every aggregate can be
    recomputed from the report alone.
    """
    if not rows:
        raise ValidationError("cannot build a report from zero scored claims")
    pos = [r.label == LABEL_SUPPORTED for r in rows]
    scores = [r.score for r in rows]
    pooled = auroc(scores, pos)

    per_generation: list[dict] = []
    by_topic: dict[str, list[EvalRow]] = {}
    for row in rows:
        by_topic.setdefault(row.topic, []).append(row)
    for topic, topic_rows in by_topic.items():
        labels = {r.label for r in topic_rows}
        if len(labels) < 2:
            continue
        value = auroc([r.score for r in topic_rows], [r.label == LABEL_SUPPORTED for r in topic_rows])
        per_generation.append({"topic": topic, "auroc": value})

    per_gen_values = [p["auroc"] for p in per_generation]
    s_scores = [r.score for r in rows if r.label == LABEL_SUPPORTED]
    ns_scores = [r.score for r in rows if r.label == LABEL_NOT_SUPPORTED]
    return {
        "n_samples": n,
        "pooled_auroc": pooled,
        "per_generation_auroc": per_generation,
        "per_generation_mean": float(np.mean(per_gen_values)) if per_gen_values else None,
        "per_generation_variance": float(np.var(per_gen_values)) if per_gen_values else None,
        "class_mean_score": {
            LABEL_SUPPORTED: float(np.mean(s_scores)) if s_scores else None,
            LABEL_NOT_SUPPORTED: float(np.mean(ns_scores)) if ns_scores else None,
        },
        "histogram": {
            LABEL_SUPPORTED: _histogram(s_scores),
            LABEL_NOT_SUPPORTED: _histogram(ns_scores),
        },
        "n_generations": len(by_topic),
        "n_claims": {
            LABEL_SUPPORTED: len(s_scores),
            LABEL_NOT_SUPPORTED: len(ns_scores),
        },
        "mean_claims_per_generation": len(rows) / len(by_topic),
        "rows": [r.as_dict() for r in rows],
        "errors": list(errors),
    }


def sweep_sample_size(
    dataset: Sequence[LabeledGeneration], n_max: int, gateway: Gateway
) -> list[dict]:
    """Pooled AUROC for every sample budget 1..n_max on one shared gateway.

    Each budget reuses the judgments of the smaller ones through the gateway
    cache, so the whole sweep costs no more backend calls than scoring at
    n_max alone.
    """
    if n_max < 1:
        raise ValidationError("sweep needs n_max >= 1")
    points: list[dict] = []
    for budget in range(1, n_max + 1):
        rows, _ = score_dataset(dataset, budget, gateway)
        value = auroc([r.score for r in rows], [r.label == LABEL_SUPPORTED for r in rows])
        points.append({"n": budget, "auroc": value})
    return points


def synthesize_fixture_dataset(
    seed: int,
    n_generations: int,
    s_rate: float = DEFAULT_S_RATE,
    ns_rate: float = DEFAULT_NS_RATE,
    n_samples: int = 20,
    claims_per_generation: int = 26,
) -> tuple[list[LabeledGeneration], dict]:
    """Build a deterministic dataset plus the fixture table that scores it.

    Each claim is supported by each sample with its class rate (s_rate for S,
    ns_rate for NS), planted as entailment entries; everything else is
    neutral. Label proportions follow the 44/42/14 S/NS/IR split. The same
    seed always yields byte-identical output.
    """
    if not 0.0 <= s_rate <= 1.0 or not 0.0 <= ns_rate <= 1.0:
        raise ValidationError("planting rates must lie in [0, 1]")
    if n_generations < 1 or n_samples < 1 or claims_per_generation < 1:
        raise ValidationError("synthesis sizes must be positive")
    rng = random.Random(seed)
    generations: list[LabeledGeneration] = []
    nli_entries: list[dict] = []
    for g in range(n_generations):
        topic = f"topic-{g:03d}"
        sample_texts = [
            f"Sample {s} reports on {topic}." for s in range(n_samples)
        ]
        claims: list[LabeledClaim] = []
        for c in range(claims_per_generation):
            draw = rng.random()
            if draw < 0.44:
                label = LABEL_SUPPORTED
            elif draw < 0.86:
                label = LABEL_NOT_SUPPORTED
            else:
                label = LABEL_IRRELEVANT
            text = f"Claim {c} holds for {topic}."
            rate = s_rate if label == LABEL_SUPPORTED else ns_rate
            for sample_text in sample_texts:
                planted = rng.random() < rate
                if label == LABEL_IRRELEVANT:
                    planted = False
                nli_entries.append(
                    {
                        "premise": sample_text,
                        "hypothesis": text,
                        "label": ENTAILMENT if planted else NEUTRAL,
                    }
                )
            if label != LABEL_IRRELEVANT:
                claims.append(LabeledClaim(text=text, label=label))
        if not claims:
            continue
        generations.append(
            LabeledGeneration(
                topic=topic,
                generation=" ".join(c.text for c in claims),
                claims=tuple(claims),
                additional_samples=tuple(sample_texts),
                model=f"synthetic-seed-{seed}",
            )
        )
    fixture = {"generations": [], "qa": [], "nli": nli_entries, "tasks": []}
    return generations, fixture


def dataset_record(record: LabeledGeneration) -> dict:
    out = {
        "topic": record.topic,
        "generation": record.generation,
        "claims": [{"text": c.text, "label": c.label} for c in record.claims],
        "additional_samples": list(record.additional_samples),
    }
    if record.model:
        out["model"] = record.model
    return out


def write_dataset(path: str | os.PathLike, dataset: Sequence[LabeledGeneration]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in dataset:
            fh.write(json.dumps(dataset_record(record), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def fixture_sibling_path(dataset_path: str | os.PathLike) -> str:
    return f"{dataset_path}.fixture.json"


def write_fixture_file(path: str | os.PathLike, fixture: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fixture, fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def write_scores_csv(path: str | os.PathLike, rows: Sequence[EvalRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic", "claim", "label", "score"])
        for row in rows:
            writer.writerow([row.topic, row.claim, row.label, f"{row.score:.6f}"])
