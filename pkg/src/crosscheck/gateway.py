"""Uniform access to the four model capabilities behind the verifier.

Every model interaction flows through :class:`Gateway`: free-form generation,
natural-language inference, extractive question answering, and templated text
completion. A gateway wraps either a live HTTP backend or a strict in-memory
fixture table, memoizes responses keyed by the exact request, and counts both
backend calls and cache hits per capability.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Protocol, runtime_checkable

from .errors import (
    DuplicateFixtureKeyError,
    FixtureParseError,
    FixtureUnderflowError,
    MissingCredentialError,
    MissingFixtureEntryError,
    TransportError,
    ValidationError,
)

log = logging.getLogger(__name__)

ENTAILMENT = "entailment"
CONTRADICTION = "contradiction"
NEUTRAL = "neutral"
NLI_LABELS = (ENTAILMENT, CONTRADICTION, NEUTRAL)

TEMPLATE_IDS = ("claim_decomposition", "question_from_claim", "question_from_span")

# Placeholders each template must receive, in the order they appear.
_TEMPLATE_SLOTS = {
    "claim_decomposition": ("sentence",),
    "question_from_claim": ("claim",),
    "question_from_span": ("context", "target"),
}

_TEMPLATE_FILES = {
    "claim_decomposition": "prompt_claim_decomposition.txt",
    "question_from_claim": "prompt_question_from_claim.txt",
    "question_from_span": "prompt_question_from_span.txt",
}

API_KEY_VAR = "CROSSCHECK_API_KEY"
GENERATOR_URL_VAR = "CROSSCHECK_GENERATOR_URL"
NLI_URL_VAR = "CROSSCHECK_NLI_URL"
QA_URL_VAR = "CROSSCHECK_QA_URL"
TASK_URL_VAR = "CROSSCHECK_TASK_URL"


@dataclass(frozen=True)
class EntailmentLabel:
    """One NLI judgment: a directional label plus the winning-class confidence."""

    label: str
    confidence: float = 1.0

    def __post_init__(self):
        if self.label not in NLI_LABELS:
            raise ValidationError(f"unknown NLI label {self.label!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class QAResult:
    """An extractive answer; when found, (start, end) index its passage verbatim."""

    found: bool
    answer_text: str = ""
    start: int | None = None
    end: int | None = None
    confidence: float = 0.0

    def __post_init__(self):
        if self.found and (self.start is None or self.end is None):
            raise ValidationError("found answer requires a character span")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class BackendConfig:
    """Connection and decoding parameters shared by all capabilities.

    Endpoint fields may stay empty for fixture backends. Decoding defaults
    follow the sampling regime used for the comparison set: temperature 1.0
    with nucleus threshold 0.95.
    """

    generator_endpoint: str = ""
    nli_endpoint: str = ""
    qa_endpoint: str = ""
    task_endpoint: str = ""
    generator_model: str = "fixture"
    nli_model: str = "fixture"
    qa_model: str = "fixture"
    task_model: str = "fixture"
    temperature: float = 1.0
    top_p: float = 0.95
    max_tokens: int = 512
    timeout: float = 30.0
    retry_budget: int = 2
    qa_no_answer_threshold: float = 0.3

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValidationError("timeout must be positive")
        if self.retry_budget < 0:
            raise ValidationError("retry budget must be non-negative")
        if not 0.0 <= self.qa_no_answer_threshold <= 1.0:
            raise ValidationError("qa_no_answer_threshold outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "generator_endpoint": self.generator_endpoint,
            "nli_endpoint": self.nli_endpoint,
            "qa_endpoint": self.qa_endpoint,
            "task_endpoint": self.task_endpoint,
            "generator_model": self.generator_model,
            "nli_model": self.nli_model,
            "qa_model": self.qa_model,
            "task_model": self.task_model,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "timeout": self.timeout,
            "retry_budget": self.retry_budget,
            "qa_no_answer_threshold": self.qa_no_answer_threshold,
        }


def render_template(template_id: str, slots: Mapping[str, str]) -> str:
    """Fill a committed prompt template; every placeholder must be supplied."""
    if template_id not in TEMPLATE_IDS:
        raise ValidationError(f"unknown template id {template_id!r}")
    text = load_template(template_id)
    for name in _TEMPLATE_SLOTS[template_id]:
        if name not in slots:
            raise ValidationError(f"template {template_id!r} missing slot {name!r}")
        text = text.replace("{" + name + "}", slots[name])
    return text


def load_template(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise ValidationError(f"unknown template id {template_id!r}")
    ref = resources.files("crosscheck.data").joinpath(_TEMPLATE_FILES[template_id])
    return ref.read_text(encoding="utf-8")


@runtime_checkable
class Backend(Protocol):
    """Raw capability provider; the gateway layers caching and stats on top."""

    name: str

    def generate(self, prompt: str, n: int, config: BackendConfig) -> list[str]: ...

    def nli(self, premise: str, hypothesis: str, config: BackendConfig) -> EntailmentLabel: ...

    def extract_answer(self, question: str, passage: str, config: BackendConfig) -> QAResult: ...

    def complete_task(self, template_id: str, prompt: str, config: BackendConfig) -> str: ...


class FixtureTable:
    """Exact-string lookup tables backing the offline fixture backend.

    Lookups are strict: a missing key raises instead of defaulting. The one
    structural rule is NLI reflexivity: a premise paired with an identical
    hypothesis is entailment by definition of the table, so those pairs need
    no explicit entry. Counters record every backend consultation, including
    a per-template breakdown for the task capability.
    """

    def __init__(
        self,
        generations: list[str] | None = None,
        qa_entries: Mapping[tuple[str, str], QAResult] | None = None,
        nli_entries: Mapping[tuple[str, str], str] | None = None,
        task_entries: Mapping[tuple[str, str], str] | None = None,
    ):
        self.generations = list(generations or [])
        self.qa_entries = dict(qa_entries or {})
        self.nli_entries = dict(nli_entries or {})
        self.task_entries = dict(task_entries or {})
        for (premise, hypothesis), label in self.nli_entries.items():
            if label not in NLI_LABELS:
                raise FixtureParseError(
                    f"nli entry ({premise!r}, {hypothesis!r}) has bad label {label!r}"
                )
        self.call_counters: dict[str, int] = {}
        self._cursor = 0
        self._lock = threading.Lock()

    def _bump(self, counter: str) -> None:
        self.call_counters[counter] = self.call_counters.get(counter, 0) + 1

    def next_generations(self, n: int) -> list[str]:
        with self._lock:
            self._bump("generate")
            if self._cursor + n > len(self.generations):
                remaining = len(self.generations) - self._cursor
                raise FixtureUnderflowError(
                    f"requested {n} generations but only {remaining} remain in the fixture"
                )
            out = self.generations[self._cursor : self._cursor + n]
            self._cursor += n
            return out

    def lookup_nli(self, premise: str, hypothesis: str) -> str:
        with self._lock:
            self._bump("nli")
            if premise == hypothesis:
                return ENTAILMENT
            try:
                return self.nli_entries[(premise, hypothesis)]
            except KeyError:
                raise MissingFixtureEntryError("nli", (premise, hypothesis)) from None

    def lookup_qa(self, question: str, passage: str) -> QAResult:
        with self._lock:
            self._bump("qa")
            try:
                return self.qa_entries[(question, passage)]
            except KeyError:
                raise MissingFixtureEntryError("qa", (question, passage)) from None

    def lookup_task(self, template_id: str, prompt: str) -> str:
        with self._lock:
            self._bump("task")
            self._bump(f"task:{template_id}")
            try:
                return self.task_entries[(template_id, prompt)]
            except KeyError:
                raise MissingFixtureEntryError("task", (template_id, prompt)) from None


def _parse_entry(kind: str, index: int, entry: object, fields: tuple[str, ...]) -> dict:
    if not isinstance(entry, dict):
        raise FixtureParseError(f"{kind}[{index}] is not an object")
    missing = [f for f in fields if f not in entry]
    if missing:
        raise FixtureParseError(f"{kind}[{index}] missing field(s) {missing}")
    return entry


def fixture_from_dict(doc: dict) -> FixtureTable:
    """Build a strict table from the single-document fixture schema."""
    if not isinstance(doc, dict):
        raise FixtureParseError("fixture document must be a JSON object")
    generations = doc.get("generations", [])
    if not isinstance(generations, list) or not all(isinstance(g, str) for g in generations):
        raise FixtureParseError("generations must be an array of strings")

    qa: dict[tuple[str, str], QAResult] = {}
    for i, raw in enumerate(doc.get("qa", [])):
        entry = _parse_entry("qa", i, raw, ("question", "passage", "found"))
        key = (entry["question"], entry["passage"])
        if key in qa:
            raise DuplicateFixtureKeyError(f"qa[{i}] duplicates key {key!r}")
        found = bool(entry["found"])
        if found:
            for f in ("answer", "start", "end"):
                if f not in entry:
                    raise FixtureParseError(f"qa[{i}] found entry missing field {f!r}")
            result = QAResult(
                found=True,
                answer_text=entry["answer"],
                start=int(entry["start"]),
                end=int(entry["end"]),
                confidence=float(entry.get("confidence", 1.0)),
            )
            passage = entry["passage"]
            if passage[result.start : result.end] != result.answer_text:
                raise FixtureParseError(
                    f"qa[{i}] span ({result.start}, {result.end}) does not match the answer text"
                )
        else:
            result = QAResult(found=False, confidence=float(entry.get("confidence", 0.0)))
        qa[key] = result

    nli: dict[tuple[str, str], str] = {}
    for i, raw in enumerate(doc.get("nli", [])):
        entry = _parse_entry("nli", i, raw, ("premise", "hypothesis", "label"))
        key = (entry["premise"], entry["hypothesis"])
        if key in nli:
            raise DuplicateFixtureKeyError(f"nli[{i}] duplicates key {key!r}")
        if entry["label"] not in NLI_LABELS:
            raise FixtureParseError(f"nli[{i}] has unknown label {entry['label']!r}")
        nli[key] = entry["label"]

    tasks: dict[tuple[str, str], str] = {}
    for i, raw in enumerate(doc.get("tasks", [])):
        entry = _parse_entry("tasks", i, raw, ("template", "prompt", "completion"))
        if entry["template"] not in TEMPLATE_IDS:
            raise FixtureParseError(f"tasks[{i}] has unknown template {entry['template']!r}")
        key = (entry["template"], entry["prompt"])
        if key in tasks:
            raise DuplicateFixtureKeyError(f"tasks[{i}] duplicates key {key!r}")
        tasks[key] = entry["completion"]

    return FixtureTable(generations, qa, nli, tasks)


def load_fixture(path: str | os.PathLike) -> FixtureTable:
    """Parse a fixture file, reporting the failing entry on bad input."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FixtureParseError(f"cannot read fixture {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureParseError(f"fixture {path} is not valid JSON: {exc}") from exc
    return fixture_from_dict(doc)


class FixtureBackend:
    """Backend that answers solely from a FixtureTable."""

    name = "fixture"

    def __init__(self, table: FixtureTable):
        self.table = table

    def generate(self, prompt: str, n: int, config: BackendConfig) -> list[str]:
        return self.table.next_generations(n)

    def nli(self, premise: str, hypothesis: str, config: BackendConfig) -> EntailmentLabel:
        return EntailmentLabel(self.table.lookup_nli(premise, hypothesis), 1.0)

    def extract_answer(self, question: str, passage: str, config: BackendConfig) -> QAResult:
        return self.table.lookup_qa(question, passage)

    def complete_task(self, template_id: str, prompt: str, config: BackendConfig) -> str:
        return self.table.lookup_task(template_id, prompt)


def parse_nli_response(data: dict) -> EntailmentLabel:
    """Accept either {label, score?} or {labels: [...], scores: [...]} shapes."""
    if "label" in data:
        label = str(data["label"]).lower()
        confidence = float(data.get("score", data.get("confidence", 1.0)))
    elif "labels" in data and "scores" in data:
        pairs = list(zip(data["labels"], data["scores"]))
        if not pairs:
            raise TransportError("NLI response carried empty label list")
        label, confidence = max(pairs, key=lambda p: p[1])
        label = str(label).lower()
        confidence = float(confidence)
    else:
        raise TransportError(f"unrecognized NLI response shape: {sorted(data)}")
    if label not in NLI_LABELS:
        raise TransportError(f"NLI backend returned unknown label {label!r}")
    return EntailmentLabel(label, min(max(confidence, 0.0), 1.0))


def parse_qa_response(data: dict, passage: str, threshold: float) -> QAResult:
    """Normalize a span-QA response and enforce span fidelity against the passage.

    Backends occasionally return offsets that disagree with the answer text;
    those are realigned to the first verbatim occurrence, or demoted to
    not-found when the text does not occur at all.
    """
    answer = str(data.get("answer", "") or "")
    score = float(data.get("score", data.get("confidence", 0.0)) or 0.0)
    if not answer or score < threshold:
        return QAResult(found=False, confidence=min(max(score, 0.0), 1.0))
    start = data.get("start")
    end = data.get("end")
    if start is None or end is None or passage[start:end] != answer:
        idx = passage.find(answer)
        if idx < 0:
            return QAResult(found=False, confidence=min(max(score, 0.0), 1.0))
        start, end = idx, idx + len(answer)
    return QAResult(
        found=True,
        answer_text=answer,
        start=int(start),
        end=int(end),
        confidence=min(max(score, 0.0), 1.0),
    )


class HttpBackend:
    """Live backend speaking to four HTTP endpoints.

    Generation and task completion use a chat-completions payload; NLI and QA
    use plain JSON inference payloads. Requests retry on transport faults and
    5xx responses until the retry budget is exhausted. The API credential is
    read from the environment at construction time.
    """

    name = "live"

    def __init__(self, config: BackendConfig, api_key: str | None = None):
        key = api_key if api_key is not None else os.environ.get(API_KEY_VAR, "")
        if not key:
            raise MissingCredentialError(f"{API_KEY_VAR} is not set")
        for field_name in ("generator_endpoint", "nli_endpoint", "qa_endpoint", "task_endpoint"):
            if not getattr(config, field_name):
                raise MissingCredentialError(f"live backend requires {field_name}")
        import httpx

        self._client = httpx.Client(
            timeout=config.timeout,
            headers={"Authorization": f"Bearer {key}"},
        )

    def _post(self, url: str, payload: dict, config: BackendConfig) -> dict:
        import httpx

        attempts = 0
        last_error: Exception | None = None
        while attempts <= config.retry_budget:
            attempts += 1
            try:
                response = self._client.post(url, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = TransportError(
                    f"{url} returned {response.status_code}", attempts
                )
                continue
            if response.status_code >= 400:
                raise TransportError(
                    f"{url} returned {response.status_code}: {response.text[:200]}",
                    attempts,
                )
            return response.json()
        raise TransportError(
            f"{url} failed after {attempts} attempt(s): {last_error}", attempts
        )

    def generate(self, prompt: str, n: int, config: BackendConfig) -> list[str]:
        data = self._post(
            config.generator_endpoint,
            {
                "model": config.generator_model,
                "messages": [{"role": "user", "content": prompt}],
                "n": n,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "max_tokens": config.max_tokens,
            },
            config,
        )
        choices = data.get("choices", [])
        texts = []
        for choice in choices:
            if "message" in choice:
                texts.append(str(choice["message"].get("content", "")))
            else:
                texts.append(str(choice.get("text", "")))
        if len(texts) != n:
            raise TransportError(f"generator returned {len(texts)} choices, expected {n}")
        return texts

    def nli(self, premise: str, hypothesis: str, config: BackendConfig) -> EntailmentLabel:
        data = self._post(
            config.nli_endpoint,
            {"model": config.nli_model, "premise": premise, "hypothesis": hypothesis},
            config,
        )
        return parse_nli_response(data)

    def extract_answer(self, question: str, passage: str, config: BackendConfig) -> QAResult:
        data = self._post(
            config.qa_endpoint,
            {"model": config.qa_model, "question": question, "context": passage},
            config,
        )
        return parse_qa_response(data, passage, config.qa_no_answer_threshold)

    def complete_task(self, template_id: str, prompt: str, config: BackendConfig) -> str:
        data = self._post(
            config.task_endpoint,
            {
                "model": config.task_model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": 0.0,
                "max_tokens": config.max_tokens,
            },
            config,
        )
        choices = data.get("choices", [])
        if not choices:
            raise TransportError("task endpoint returned no choices")
        choice = choices[0]
        if "message" in choice:
            return str(choice["message"].get("content", ""))
        return str(choice.get("text", ""))


@dataclass
class GatewayStats:
    """Backend calls and cache hits, tracked per capability."""

    calls: dict[str, int] = field(default_factory=dict)
    cache_hits: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "calls": dict(sorted(self.calls.items())),
            "cache_hits": dict(sorted(self.cache_hits.items())),
        }


class Gateway:
    """Caching front door for one backend instance.

    Responses are memoized by the exact request tuple, model identifier
    included, so repeating any operation returns an identical value without
    consulting the backend again. Concurrent requests for the same key are
    coalesced into a single backend call, which keeps the counters
    deterministic under the bounded fan-out used by the verifier.
    """

    def __init__(self, backend: Backend, config: BackendConfig | None = None):
        self.backend = backend
        self.config = config or BackendConfig()
        self.stats = GatewayStats()
        self._cache: dict[tuple, object] = {}
        self._inflight: dict[tuple, threading.Event] = {}
        self._lock = threading.Lock()

    def _cached(self, capability: str, key: tuple, compute, extra_counters: tuple = ()):
        while True:
            with self._lock:
                if key in self._cache:
                    for counter in (capability, *extra_counters):
                        self.stats.cache_hits[counter] = (
                            self.stats.cache_hits.get(counter, 0) + 1
                        )
                    return self._cache[key]
                event = self._inflight.get(key)
                if event is None:
                    event = threading.Event()
                    self._inflight[key] = event
                    owner = True
                else:
                    owner = False
            if not owner:
                event.wait()
                continue
            try:
                value = compute()
            except BaseException:
                with self._lock:
                    del self._inflight[key]
                event.set()
                raise
            with self._lock:
                self._cache[key] = value
                del self._inflight[key]
                for counter in (capability, *extra_counters):
                    self.stats.calls[counter] = self.stats.calls.get(counter, 0) + 1
            event.set()
            return value

    def generate(self, prompt: str, n: int) -> list[str]:
        """Sample n generations; index 0 is the presented response."""
        if not prompt:
            raise ValidationError("prompt must be non-empty")
        if n < 1:
            raise ValidationError("n must be at least 1")
        key = ("generate", self.config.generator_model, prompt, n)
        return list(
            self._cached(
                "generate", key, lambda: list(self.backend.generate(prompt, n, self.config))
            )
        )

    def nli(self, premise: str, hypothesis: str) -> EntailmentLabel:
        if not premise or not hypothesis:
            raise ValidationError("NLI premise and hypothesis must be non-empty")
        key = ("nli", self.config.nli_model, premise, hypothesis)
        return self._cached(
            "nli", key, lambda: self.backend.nli(premise, hypothesis, self.config)
        )

    def extract_answer(self, question: str, passage: str) -> QAResult:
        if not question.strip().endswith("?"):
            raise ValidationError("question must end with '?'")
        if not passage:
            raise ValidationError("passage must be non-empty")
        key = ("qa", self.config.qa_model, question, passage)
        result = self._cached(
            "qa", key, lambda: self.backend.extract_answer(question, passage, self.config)
        )
        if result.found and result.confidence < self.config.qa_no_answer_threshold:
            result = QAResult(found=False, confidence=result.confidence)
        if result.found and passage[result.start : result.end] != result.answer_text:
            raise ValidationError(
                f"backend span ({result.start}, {result.end}) does not match the answer text"
            )
        return result

    def complete_task(self, template_id: str, slots: Mapping[str, str]) -> str:
        prompt = render_template(template_id, slots)
        key = ("task", self.config.task_model, template_id, prompt)
        return self._cached(
            "task",
            key,
            lambda: self.backend.complete_task(template_id, prompt, self.config),
            extra_counters=(f"task:{template_id}",),
        )


def fixture_gateway(table: FixtureTable, config: BackendConfig | None = None) -> Gateway:
    """Convenience constructor used by tests and the CLI fixture path."""
    return Gateway(FixtureBackend(table), config or BackendConfig())
