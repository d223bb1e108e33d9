"""HTTP facade over the session manager.

Every response body is JSON. Errors share a uniform shape
{code, message, detail} regardless of which layer raised them.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    BackendError,
    CrosscheckError,
    EmptyDecompositionError,
    MalformedQuestionError,
    SessionNotFoundError,
    UndefinedScoreError,
    UnknownTargetError,
    ValidationError,
)
from .serialization import annotation_to_dict, evidence_to_dict
from .session import SessionManager, VerificationSession

log = logging.getLogger(__name__)


def _code(exc: Exception) -> str:
    name = type(exc).__name__
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0:
            out.append("_")
        out.append(ch.lower())
    return "".join(out).replace("_error", "")


def _status_for(exc: CrosscheckError) -> int:
    if isinstance(exc, (SessionNotFoundError, UnknownTargetError)):
        return 404
    if isinstance(exc, ValidationError):
        return 400
    if isinstance(exc, (BackendError, EmptyDecompositionError, MalformedQuestionError, UndefinedScoreError)):
        return 502
    return 500


def _error_response(exc: CrosscheckError) -> JSONResponse:
    detail: dict = {"type": type(exc).__name__}
    attempts = getattr(exc, "attempts", None)
    if attempts is not None:
        detail["attempts"] = attempts
    return JSONResponse(
        status_code=_status_for(exc),
        content={"code": _code(exc), "message": str(exc), "detail": detail},
    )


class CreateSessionBody(BaseModel):
    prompt: str
    num_samples: int = 20
    backend: str | None = None


class BrushBody(BaseModel):
    sentence_index: int
    start: int
    end: int


class ConfirmBrushBody(BaseModel):
    token: str


class EditBody(BaseModel):
    new_text: str


def _state(session: VerificationSession) -> dict:
    return session.to_payload()


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="crosscheck", docs_url=None, redoc_url=None)

    @app.exception_handler(CrosscheckError)
    def handle_crosscheck_error(request: Request, exc: CrosscheckError):
        log.warning("%s %s -> %s: %s", request.method, request.url.path, _code(exc), exc)
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    def handle_request_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation",
                "message": "request body failed validation",
                "detail": {"errors": exc.errors()},
            },
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = manager.create_session(
            prompt=body.prompt, num_samples=body.num_samples, backend_name=body.backend
        )
        return {"session_id": session.session_id, "state": _state(session)}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return {"state": _state(manager.get_session(session_id))}

    @app.post("/api/sessions/{session_id}/brush")
    def brush(session_id: str, body: BrushBody):
        suggested, token = manager.suggest_brush(
            session_id, body.sentence_index, body.start, body.end
        )
        return {"suggested_question": suggested, "token": token}

    @app.post("/api/sessions/{session_id}/brush/confirm")
    def confirm_brush(session_id: str, body: ConfirmBrushBody):
        annotation = manager.confirm_brush(session_id, body.token)
        return {"annotation": annotation_to_dict(annotation)}

    @app.post("/api/sessions/{session_id}/edit")
    def edit(session_id: str, body: EditBody):
        return {"state": _state(manager.apply_edit(session_id, body.new_text))}

    @app.get("/api/sessions/{session_id}/evidence")
    def evidence(session_id: str, target: str):
        return {"evidence": evidence_to_dict(manager.evidence(session_id, target))}

    return app
