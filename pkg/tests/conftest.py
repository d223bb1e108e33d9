"""Shared builders for fixture-backed gateways used across the suite."""

from __future__ import annotations

import pytest

from crosscheck.core import verify_generation
from crosscheck.demo import DEMO_PROMPT, demo_fixture_table
from crosscheck.gateway import (
    BackendConfig,
    FixtureBackend,
    FixtureTable,
    Gateway,
    QAResult,
    render_template,
)


def qa_found(passage: str, answer: str, confidence: float = 0.9) -> QAResult:
    """A found answer whose span is located inside the passage."""
    start = passage.index(answer)
    return QAResult(
        found=True,
        answer_text=answer,
        start=start,
        end=start + len(answer),
        confidence=confidence,
    )


QA_NOT_FOUND = QAResult(found=False, confidence=0.1)


def task_key(template_id: str, slots: dict) -> tuple[str, str]:
    return (template_id, render_template(template_id, slots))


def make_table(
    generations: tuple[str, ...] = (),
    qa: dict | None = None,
    nli: dict | None = None,
    tasks: dict | None = None,
) -> FixtureTable:
    return FixtureTable(
        generations=list(generations),
        qa_entries=qa or {},
        nli_entries=nli or {},
        task_entries=tasks or {},
    )


def make_gateway(
    generations: tuple[str, ...] = (),
    qa: dict | None = None,
    nli: dict | None = None,
    tasks: dict | None = None,
    config: BackendConfig | None = None,
) -> Gateway:
    table = make_table(generations, qa, nli, tasks)
    return Gateway(FixtureBackend(table), config or BackendConfig())


@pytest.fixture()
def demo_gateway() -> Gateway:
    return Gateway(FixtureBackend(demo_fixture_table()), BackendConfig())


@pytest.fixture()
def rodrigo_result(demo_gateway):
    return verify_generation(DEMO_PROMPT, 5, demo_gateway)
