"""Dataset loading, AUROC, scoring, reports, sweeps, and synthetic data."""

from __future__ import annotations

import csv
import json
import random
import statistics

import pytest
from hypothesis import given, strategies as st

from crosscheck.errors import (
    MissingFixtureEntryError,
    UndefinedMetricError,
    ValidationError,
)
from crosscheck.evaluation import (
    DEFAULT_NS_RATE,
    DEFAULT_S_RATE,
    LABEL_NOT_SUPPORTED,
    LABEL_SUPPORTED,
    EvalRow,
    LabeledClaim,
    LabeledGeneration,
    auroc,
    build_report,
    dataset_record,
    fixture_sibling_path,
    load_dataset,
    score_dataset,
    score_generation,
    sweep_sample_size,
    synthesize_fixture_dataset,
    write_dataset,
    write_fixture_file,
    write_scores_csv,
)
from crosscheck.gateway import ENTAILMENT, FixtureBackend, Gateway, fixture_from_dict

from conftest import make_gateway


def _synthetic_gateway(fixture: dict) -> Gateway:
    return Gateway(FixtureBackend(fixture_from_dict(fixture)))


# --- AUROC ---------------------------------------------------------------------

def _pair_oracle(scores, positives) -> float:
    """O(P*N) definition: P(random positive outscores random negative)."""
    pos = [s for s, p in zip(scores, positives) if p]
    neg = [s for s, p in zip(scores, positives) if not p]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def test_auroc_matches_pairwise_oracle_on_random_instances():
    rng = random.Random(2024)
    checked = 0
    while checked < 1000:
        size = rng.randint(2, 40)
        if rng.random() < 0.5:
            scores = [rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]) for _ in range(size)]
        else:
            scores = [rng.random() for _ in range(size)]
        positives = [rng.random() < 0.5 for _ in range(size)]
        if all(positives) or not any(positives):
            continue
        checked += 1
        assert auroc(scores, positives) == pytest.approx(
            _pair_oracle(scores, positives), abs=1e-9
        )


def test_auroc_perfect_separation():
    assert auroc([0.9, 0.5, 0.1], [True, True, False]) == pytest.approx(1.0)


def test_auroc_edge_values():
    assert auroc([0.1, 0.9], [True, False]) == pytest.approx(0.0)
    assert auroc([0.5, 0.5], [True, False]) == pytest.approx(0.5)


def test_auroc_single_class_is_undefined():
    with pytest.raises(UndefinedMetricError):
        auroc([0.1, 0.9], [True, True])
    with pytest.raises(UndefinedMetricError):
        auroc([0.1, 0.9], [False, False])


def test_auroc_length_mismatch():
    with pytest.raises(ValidationError):
        auroc([0.1, 0.9], [True])


@given(
    st.lists(
        st.tuples(st.floats(min_value=0, max_value=1), st.booleans()),
        min_size=2,
        max_size=25,
    ).filter(lambda rows: 0 < sum(p for _, p in rows) < len(rows))
)
def test_auroc_complement_symmetry(rows):
    scores = [s for s, _ in rows]
    positives = [p for _, p in rows]
    flipped = [not p for p in positives]
    assert auroc(scores, positives) + auroc(scores, flipped) == pytest.approx(1.0)


# --- dataset loading ----------------------------------------------------------------

def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


GOOD_RECORD = {
    "topic": "t1",
    "generation": "G one.",
    "claims": [
        {"text": "c1", "label": "S"},
        {"text": "c2", "label": "IR"},
        {"text": "c3", "label": "NS"},
    ],
    "additional_samples": ["s1", "s2"],
    "model": "m",
}


def test_load_dataset_drops_ir_and_claimless(tmp_path):
    path = tmp_path / "data.jsonl"
    all_ir = {
        "topic": "t2",
        "generation": "G two.",
        "claims": [{"text": "x", "label": "IR"}],
        "additional_samples": [],
    }
    _write_jsonl(path, [GOOD_RECORD, all_ir])
    dataset = load_dataset(path)
    assert len(dataset) == 1
    record = dataset[0]
    assert [(c.text, c.label) for c in record.claims] == [("c1", "S"), ("c3", "NS")]
    assert record.model == "m"
    assert record.additional_samples == ("s1", "s2")


def test_load_dataset_defaults_model_to_empty(tmp_path):
    path = tmp_path / "data.jsonl"
    record = {k: v for k, v in GOOD_RECORD.items() if k != "model"}
    _write_jsonl(path, [record])
    assert load_dataset(path)[0].model == ""


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda r: r.pop("topic"), "missing field 'topic'"),
        (lambda r: r["claims"].append({"text": "x"}), "claims[3]"),
        (lambda r: r["claims"].append({"text": "x", "label": "YES"}), "unknown label"),
        (lambda r: r.update(additional_samples="nope"), "array of strings"),
    ],
)
def test_load_dataset_diagnostics(tmp_path, mutate, fragment):
    record = json.loads(json.dumps(GOOD_RECORD))
    mutate(record)
    path = tmp_path / "data.jsonl"
    _write_jsonl(path, [GOOD_RECORD, record])
    with pytest.raises(ValidationError) as err:
        load_dataset(path)
    message = str(err.value)
    assert ":2:" in message
    assert fragment in message


def test_load_dataset_reports_json_error_line(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(json.dumps(GOOD_RECORD) + "\n{broken\n", encoding="utf-8")
    with pytest.raises(ValidationError) as err:
        load_dataset(path)
    assert ":2: invalid JSON" in str(err.value)


def test_labeled_claim_rejects_ir_after_load():
    with pytest.raises(ValidationError):
        LabeledClaim(text="x", label="IR")


def test_labeled_generation_requires_claims():
    with pytest.raises(ValidationError):
        LabeledGeneration(topic="t", generation="g", claims=(), additional_samples=())


def test_dataset_round_trip(tmp_path):
    dataset, _ = synthesize_fixture_dataset(seed=3, n_generations=4, n_samples=3)
    path = tmp_path / "round.jsonl"
    write_dataset(path, dataset)
    assert load_dataset(path) == dataset


# --- scoring -----------------------------------------------------------------------

def _tiny_record() -> tuple[LabeledGeneration, dict]:
    claims = (LabeledClaim("A holds.", "S"), LabeledClaim("B holds.", "NS"))
    samples = ("Sample one text.", "Sample two text.")
    record = LabeledGeneration(
        topic="tiny", generation="A holds. B holds.", claims=claims, additional_samples=samples
    )
    nli = {
        ("Sample one text.", "A holds."): "entailment",
        ("Sample two text.", "A holds."): "entailment",
        ("Sample one text.", "B holds."): "neutral",
        ("Sample two text.", "B holds."): "contradiction",
    }
    return record, nli


def test_score_generation_scores_each_claim():
    record, nli = _tiny_record()
    rows, errors = score_generation(record, 2, make_gateway(nli=nli))
    assert errors == []
    assert [(r.claim, r.label, r.score) for r in rows] == [
        ("A holds.", "S", 1.0),
        ("B holds.", "NS", 0.0),
    ]
    assert all(r.topic == "tiny" for r in rows)


def test_score_generation_validates_budget():
    record, nli = _tiny_record()
    with pytest.raises(ValidationError):
        score_generation(record, 0, make_gateway(nli=nli))
    with pytest.raises(ValidationError):
        score_generation(record, 3, make_gateway(nli=nli))


def test_score_generation_records_errors_and_continues():
    record, nli = _tiny_record()
    del nli[("Sample two text.", "B holds.")]
    rows, errors = score_generation(record, 2, make_gateway(nli=nli))
    assert [r.claim for r in rows] == ["A holds."]
    assert len(errors) == 1
    assert errors[0]["topic"] == "tiny" and errors[0]["claim"] == "B holds."
    assert "fixture entry" in errors[0]["error"]


def test_scoring_missing_entry_is_backend_error():
    record, nli = _tiny_record()
    gw = make_gateway()
    with pytest.raises(MissingFixtureEntryError):
        gw.nli("Sample one text.", "A holds.")


# --- synthetic data -------------------------------------------------------------------

def test_synthesis_is_seed_deterministic():
    a = synthesize_fixture_dataset(seed=9, n_generations=3, n_samples=4)
    b = synthesize_fixture_dataset(seed=9, n_generations=3, n_samples=4)
    assert a[0] == b[0]
    assert json.dumps(a[1], sort_keys=True) == json.dumps(b[1], sort_keys=True)
    c = synthesize_fixture_dataset(seed=10, n_generations=3, n_samples=4)
    assert c[0] != a[0]


def test_synthetic_fixture_covers_its_dataset():
    dataset, fixture = synthesize_fixture_dataset(seed=5, n_generations=3, n_samples=4)
    rows, errors = score_dataset(dataset, 4, _synthetic_gateway(fixture))
    assert errors == []
    assert len(rows) == sum(len(r.claims) for r in dataset)
    assert all(0.0 <= r.score <= 1.0 for r in rows)
    assert all(r.model == "synthetic-seed-5" for r in rows)


def test_synthesis_validates_arguments():
    with pytest.raises(ValidationError):
        synthesize_fixture_dataset(seed=1, n_generations=0)
    with pytest.raises(ValidationError):
        synthesize_fixture_dataset(seed=1, n_generations=1, s_rate=1.5)


def test_equal_planting_rates_give_null_auroc():
    values = []
    for seed in range(50):
        dataset, fixture = synthesize_fixture_dataset(
            seed=seed, n_generations=2, s_rate=0.4, ns_rate=0.4, n_samples=6
        )
        rows, _ = score_dataset(dataset, 6, _synthetic_gateway(fixture))
        values.append(
            auroc([r.score for r in rows], [r.label == LABEL_SUPPORTED for r in rows])
        )
    assert len(values) == 50
    assert abs(statistics.mean(values) - 0.5) < 0.05


def test_single_sample_auroc_matches_closed_form():
    # with one sample a score is a Bernoulli draw at the class planting rate,
    # so AUROC = s(1-ns) + (s*ns + (1-s)(1-ns))/2 = 0.704 at the default rates
    closed_form = DEFAULT_S_RATE * (1 - DEFAULT_NS_RATE) + 0.5 * (
        DEFAULT_S_RATE * DEFAULT_NS_RATE
        + (1 - DEFAULT_S_RATE) * (1 - DEFAULT_NS_RATE)
    )
    assert closed_form == pytest.approx(0.704, abs=5e-4)
    dataset, fixture = synthesize_fixture_dataset(seed=11, n_generations=80, n_samples=1)
    rows, _ = score_dataset(dataset, 1, _synthetic_gateway(fixture))
    value = auroc([r.score for r in rows], [r.label == LABEL_SUPPORTED for r in rows])
    assert value == pytest.approx(closed_form, abs=0.03)


# --- sweeps ------------------------------------------------------------------------------

def test_sweep_covers_every_budget_and_matches_pointwise_scores():
    dataset, fixture = synthesize_fixture_dataset(seed=6, n_generations=3, n_samples=5)
    points = sweep_sample_size(dataset, 5, _synthetic_gateway(fixture))
    assert [p["n"] for p in points] == [1, 2, 3, 4, 5]
    for point in points:
        gw = _synthetic_gateway(fixture)
        rows, _ = score_dataset(dataset, point["n"], gw)
        assert point["auroc"] == pytest.approx(
            auroc([r.score for r in rows], [r.label == LABEL_SUPPORTED for r in rows])
        )


def test_sweep_costs_no_more_backend_calls_than_max_budget_alone():
    dataset, fixture = synthesize_fixture_dataset(seed=6, n_generations=3, n_samples=5)
    sweep_gateway = _synthetic_gateway(fixture)
    sweep_sample_size(dataset, 5, sweep_gateway)

    single_gateway = _synthetic_gateway(fixture)
    score_dataset(dataset, 5, single_gateway)

    assert sweep_gateway.stats.calls["nli"] == single_gateway.stats.calls["nli"]
    # the smaller budgets were answered from cache
    assert sweep_gateway.stats.cache_hits["nli"] > 0


def test_sweep_validates_n_max():
    with pytest.raises(ValidationError):
        sweep_sample_size([], 0, make_gateway())


# --- reports --------------------------------------------------------------------------------

def _report_rows() -> list[EvalRow]:
    return [
        EvalRow(topic="a", claim="a1", label="S", score=0.8),
        EvalRow(topic="a", claim="a2", label="NS", score=0.2),
        EvalRow(topic="b", claim="b1", label="S", score=0.6),
        EvalRow(topic="b", claim="b2", label="S", score=0.4),
        EvalRow(topic="c", claim="c1", label="NS", score=0.0),
    ]


def test_report_aggregates_are_recomputable_from_embedded_rows():
    rows = _report_rows()
    report = build_report(rows, errors=[{"topic": "x", "claim": "y", "error": "z"}], n=7)
    assert report["n_samples"] == 7
    assert report["errors"] == [{"topic": "x", "claim": "y", "error": "z"}]

    embedded = report["rows"]
    assert embedded == [r.as_dict() for r in rows]
    recomputed = auroc(
        [r["score"] for r in embedded],
        [r["label"] == LABEL_SUPPORTED for r in embedded],
    )
    assert report["pooled_auroc"] == pytest.approx(recomputed)

    # only topics with both classes get a per-generation AUROC
    assert [p["topic"] for p in report["per_generation_auroc"]] == ["a"]
    assert report["per_generation_mean"] == pytest.approx(1.0)
    assert report["per_generation_variance"] == pytest.approx(0.0)

    assert report["n_generations"] == 3
    assert report["n_claims"] == {"S": 3, "NS": 2}
    assert sum(report["histogram"]["S"]) == 3
    assert sum(report["histogram"]["NS"]) == 2
    assert report["class_mean_score"]["S"] == pytest.approx((0.8 + 0.6 + 0.4) / 3)
    assert report["class_mean_score"]["NS"] == pytest.approx(0.1)
    assert report["mean_claims_per_generation"] == pytest.approx(5 / 3)


def test_report_requires_rows():
    with pytest.raises(ValidationError):
        build_report([])


# --- artifacts on disk ------------------------------------------------------------------------

def test_fixture_sibling_path_convention():
    assert fixture_sibling_path("d/data.jsonl") == "d/data.jsonl.fixture.json"


def test_write_scores_csv(tmp_path):
    path = tmp_path / "scores.csv"
    write_scores_csv(path, _report_rows()[:2])
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows == [
        ["topic", "claim", "label", "score"],
        ["a", "a1", "S", "0.800000"],
        ["a", "a2", "NS", "0.200000"],
    ]


def test_write_fixture_file_round_trips(tmp_path):
    _, fixture = synthesize_fixture_dataset(seed=2, n_generations=2, n_samples=2)
    path = tmp_path / "f.fixture.json"
    write_fixture_file(path, fixture)
    loaded = json.loads(path.read_text(encoding="utf-8"))
    assert loaded == fixture
    fixture_from_dict(loaded)  # parses as a strict table


def test_dataset_record_omits_empty_model():
    record = LabeledGeneration(
        topic="t",
        generation="g",
        claims=(LabeledClaim("c", "S"),),
        additional_samples=("s",),
    )
    assert "model" not in dataset_record(record)
