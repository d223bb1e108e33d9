"""Gateway, fixture table, template, and response-parsing behavior."""

from __future__ import annotations

import hashlib
import threading

import pytest
from hypothesis import given, strategies as st

from crosscheck.errors import (
    DuplicateFixtureKeyError,
    FixtureParseError,
    FixtureUnderflowError,
    MissingCredentialError,
    MissingFixtureEntryError,
    TransportError,
    ValidationError,
)
from crosscheck.gateway import (
    BackendConfig,
    EntailmentLabel,
    FixtureBackend,
    Gateway,
    HttpBackend,
    QAResult,
    fixture_from_dict,
    load_template,
    parse_nli_response,
    parse_qa_response,
    render_template,
)

from conftest import make_gateway, make_table, qa_found


# --- prompt templates -------------------------------------------------------

# Digests of the committed prompt templates; any byte drift fails here.
TEMPLATE_DIGESTS = {
    "claim_decomposition": "3433fabe147e2b008e8206ff2801bd7e726d8c7e65de34d779bd77c0d1503405",
    "question_from_claim": "45d357c74014b9511d81d91a16abf26e82f9a66d11ebd7a799a5a848cdde0d25",
    "question_from_span": "df2f814fdd75a27c433491b701a74af834cc456313e6d5d77efe5df38ed8cc61",
}


@pytest.mark.parametrize("template_id", sorted(TEMPLATE_DIGESTS))
def test_template_digest_frozen(template_id):
    text = load_template(template_id)
    assert hashlib.sha256(text.encode("utf-8")).hexdigest() == TEMPLATE_DIGESTS[template_id]


def test_question_from_claim_template_text():
    text = load_template("question_from_claim")
    assert text.startswith(
        "Write a question from the sentence about the sentence subject.\n"
    )
    assert "context: He became an astronaut.\nquestion: What did he become?\n" in text
    assert text.endswith("context: {claim}\nquestion:\n")


def test_question_from_span_template_text():
    text = load_template("question_from_span")
    assert text.startswith(
        "Write a question for the target words according to the context.\n"
    )
    assert "target: October 31, 1930\n" in text
    assert text.endswith("context: {context}\ntarget: {target}\nquestion:\n")


def test_decomposition_template_structure():
    text = load_template("claim_decomposition")
    assert text.count("Input:") == 5 and text.count("Output:") == 5
    assert text.endswith("Input: {sentence}\nOutput:\n")
    assert "- Michael Collins is retired.\n" in text


def test_render_template_fills_every_slot():
    rendered = render_template("question_from_span", {"context": "A b.", "target": "b"})
    assert rendered.endswith("context: A b.\ntarget: b\nquestion:\n")
    assert "{context}" not in rendered and "{target}" not in rendered


def test_render_template_rejects_unknown_and_missing():
    with pytest.raises(ValidationError):
        render_template("no_such_template", {})
    with pytest.raises(ValidationError):
        render_template("question_from_claim", {})


# --- fixture table semantics -------------------------------------------------

def test_fixture_generations_consumed_in_order():
    gw = make_gateway(generations=("a", "b", "c"))
    assert gw.generate("prompt", 2) == ["a", "b"]
    assert gw.generate("other prompt", 1) == ["c"]


def test_fixture_single_generation_identity():
    gw = make_gateway(generations=("the only text",))
    assert gw.generate("Tell me a bio of X", 1) == ["the only text"]


def test_fixture_underflow():
    gw = make_gateway(generations=("a", "b"))
    with pytest.raises(FixtureUnderflowError):
        gw.generate("anything", 3)


def test_strict_nli_miss_names_the_pair():
    gw = make_gateway(nli={("p", "h"): "entailment"})
    with pytest.raises(MissingFixtureEntryError) as err:
        gw.nli("p", "other")
    assert err.value.capability == "nli"
    assert err.value.key == ("p", "other")


def test_strict_qa_and_task_misses():
    gw = make_gateway()
    with pytest.raises(MissingFixtureEntryError):
        gw.extract_answer("Who?", "Some passage.")
    with pytest.raises(MissingFixtureEntryError):
        gw.complete_task("question_from_claim", {"claim": "X is Y."})


def test_nli_reflexivity_needs_no_entry():
    gw = make_gateway()
    label = gw.nli("Rodrigo is Spanish.", "Rodrigo is Spanish.")
    assert label == EntailmentLabel("entailment", 1.0)


def test_fixture_labels_validated_at_build():
    with pytest.raises(FixtureParseError):
        make_table(nli={("p", "h"): "maybe"})


# --- fixture document parsing -----------------------------------------------

def _doc(**over):
    doc = {
        "generations": ["g1"],
        "qa": [
            {
                "question": "Who?",
                "passage": "Bob did it.",
                "found": True,
                "answer": "Bob",
                "start": 0,
                "end": 3,
                "confidence": 0.8,
            }
        ],
        "nli": [{"premise": "p", "hypothesis": "h", "label": "neutral"}],
        "tasks": [
            {"template": "question_from_claim", "prompt": "anything", "completion": "Who?"}
        ],
    }
    doc.update(over)
    return doc


def test_fixture_from_dict_roundtrip():
    table = fixture_from_dict(_doc())
    assert table.lookup_qa("Who?", "Bob did it.").answer_text == "Bob"
    assert table.lookup_nli("p", "h") == "neutral"
    assert table.lookup_task("question_from_claim", "anything") == "Who?"


def test_fixture_parse_reports_entry_index():
    with pytest.raises(FixtureParseError) as err:
        fixture_from_dict(_doc(qa=[{"question": "Who?"}]))
    assert "qa[0]" in str(err.value)


def test_fixture_parse_rejects_bad_span():
    bad = _doc()
    bad["qa"][0]["start"] = 1
    with pytest.raises(FixtureParseError) as err:
        fixture_from_dict(bad)
    assert "span" in str(err.value)


def test_fixture_parse_rejects_duplicates():
    doc = _doc()
    doc["nli"].append(dict(doc["nli"][0]))
    with pytest.raises(DuplicateFixtureKeyError):
        fixture_from_dict(doc)


def test_fixture_parse_rejects_unknown_template():
    with pytest.raises(FixtureParseError):
        fixture_from_dict(
            _doc(tasks=[{"template": "mystery", "prompt": "p", "completion": "c"}])
        )


# --- caching and counters -----------------------------------------------------

def test_nli_cache_transparency():
    gw = make_gateway(nli={("p", "h"): "contradiction"})
    first = gw.nli("p", "h")
    second = gw.nli("p", "h")
    assert first == second
    backend_counters = gw.backend.table.call_counters
    assert backend_counters["nli"] == 1
    assert gw.stats.calls == {"nli": 1}
    assert gw.stats.cache_hits == {"nli": 1}


def test_generate_is_cached_too():
    gw = make_gateway(generations=("a", "b"))
    assert gw.generate("p", 2) == gw.generate("p", 2)
    assert gw.backend.table.call_counters["generate"] == 1
    assert gw.stats.cache_hits == {"generate": 1}


def test_task_counters_track_templates():
    gw = make_gateway(
        tasks={
            ("question_from_claim", render_template("question_from_claim", {"claim": "C."})): "Who?",
        }
    )
    gw.complete_task("question_from_claim", {"claim": "C."})
    gw.complete_task("question_from_claim", {"claim": "C."})
    assert gw.stats.calls == {"task": 1, "task:question_from_claim": 1}
    assert gw.stats.cache_hits == {"task": 1, "task:question_from_claim": 1}
    assert gw.backend.table.call_counters == {
        "task": 1,
        "task:question_from_claim": 1,
    }


def test_cache_keys_include_model_id():
    table = make_table(nli={("p", "h"): "entailment"})
    backend = FixtureBackend(table)
    gw_a = Gateway(backend, BackendConfig(nli_model="model-a"))
    gw_b = Gateway(backend, BackendConfig(nli_model="model-b"))
    gw_a.nli("p", "h")
    gw_b.nli("p", "h")
    assert table.call_counters["nli"] == 2


def test_single_flight_coalesces_concurrent_identical_requests():
    calls = []
    release = threading.Event()

    class SlowBackend:
        name = "slow"

        def nli(self, premise, hypothesis, config):
            calls.append((premise, hypothesis))
            release.wait(timeout=5)
            return EntailmentLabel("entailment", 1.0)

        def generate(self, prompt, n, config):
            raise AssertionError

        def extract_answer(self, question, passage, config):
            raise AssertionError

        def complete_task(self, template_id, prompt, config):
            raise AssertionError

    gw = Gateway(SlowBackend(), BackendConfig())
    results = []
    threads = [
        threading.Thread(target=lambda: results.append(gw.nli("p", "h")))
        for _ in range(8)
    ]
    for t in threads:
        t.start()
    release.set()
    for t in threads:
        t.join(timeout=5)
    assert len(results) == 8
    assert len(calls) == 1
    assert gw.stats.calls == {"nli": 1}
    assert gw.stats.cache_hits == {"nli": 7}


# --- request validation --------------------------------------------------------

def test_generate_validates_inputs():
    gw = make_gateway(generations=("a",))
    with pytest.raises(ValidationError):
        gw.generate("", 1)
    with pytest.raises(ValidationError):
        gw.generate("p", 0)


def test_nli_rejects_empty_strings():
    gw = make_gateway()
    with pytest.raises(ValidationError):
        gw.nli("", "h")


def test_extract_answer_requires_question_mark_and_passage():
    gw = make_gateway()
    with pytest.raises(ValidationError):
        gw.extract_answer("Tell me", "passage")
    with pytest.raises(ValidationError):
        gw.extract_answer("Who?", "")


def test_gateway_demotes_low_confidence_answers():
    passage = "Bob did it."
    gw = make_gateway(
        qa={("Who did it?", passage): qa_found(passage, "Bob", confidence=0.1)},
        config=BackendConfig(qa_no_answer_threshold=0.3),
    )
    result = gw.extract_answer("Who did it?", passage)
    assert not result.found


# --- live response parsing ------------------------------------------------------

def test_parse_nli_response_shapes():
    assert parse_nli_response({"label": "Entailment", "score": 0.9}) == EntailmentLabel(
        "entailment", 0.9
    )
    picked = parse_nli_response(
        {"labels": ["entailment", "contradiction", "neutral"], "scores": [0.2, 0.7, 0.1]}
    )
    assert picked == EntailmentLabel("contradiction", 0.7)
    with pytest.raises(TransportError):
        parse_nli_response({"label": "sideways"})
    with pytest.raises(TransportError):
        parse_nli_response({"unexpected": True})


def test_parse_qa_response_threshold_and_realignment():
    passage = "Rodrigo is a Spanish footballer."
    low = parse_qa_response({"answer": "Spanish", "score": 0.2}, passage, 0.3)
    assert not low.found and low.confidence == pytest.approx(0.2)
    shifted = parse_qa_response(
        {"answer": "Spanish", "start": 0, "end": 7, "score": 0.9}, passage, 0.3
    )
    assert (shifted.start, shifted.end) == (13, 20)
    missing = parse_qa_response({"answer": "Portuguese", "score": 0.9}, passage, 0.3)
    assert not missing.found


@given(
    prefix=st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30),
    answer=st.text(
        alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=10
    ),
    suffix=st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30),
    score=st.floats(min_value=0.3, max_value=1.0),
)
def test_parse_qa_response_span_fidelity(prefix, answer, suffix, score):
    passage = prefix + answer + suffix
    result = parse_qa_response({"answer": answer, "score": score}, passage, 0.3)
    assert result.found
    assert passage[result.start : result.end] == result.answer_text == answer


def test_qa_result_requires_span_when_found():
    with pytest.raises(ValidationError):
        QAResult(found=True, answer_text="x")


def test_gateway_rejects_backend_span_mismatch():
    class LyingBackend:
        name = "lying"

        def extract_answer(self, question, passage, config):
            return QAResult(found=True, answer_text="nope", start=0, end=4, confidence=0.9)

        def generate(self, prompt, n, config):
            raise AssertionError

        def nli(self, premise, hypothesis, config):
            raise AssertionError

        def complete_task(self, template_id, prompt, config):
            raise AssertionError

    gw = Gateway(LyingBackend(), BackendConfig())
    with pytest.raises(ValidationError):
        gw.extract_answer("Who?", "Bob did it.")


def test_http_backend_requires_credential(monkeypatch):
    monkeypatch.delenv("CROSSCHECK_API_KEY", raising=False)
    config = BackendConfig(
        generator_endpoint="http://x/g",
        nli_endpoint="http://x/n",
        qa_endpoint="http://x/q",
        task_endpoint="http://x/t",
    )
    with pytest.raises(MissingCredentialError):
        HttpBackend(config)


def test_http_backend_requires_endpoints(monkeypatch):
    monkeypatch.setenv("CROSSCHECK_API_KEY", "k")
    with pytest.raises(MissingCredentialError):
        HttpBackend(BackendConfig())
