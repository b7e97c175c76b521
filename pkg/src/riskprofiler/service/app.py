"""FastAPI service exposing the assessment lifecycle under /v1.

Endpoints delegate to the engine; every state transition is appended to the
session's event log before the response goes out. Authentication is the
bearer token issued at account creation. When a static directory is
configured (the built web client), it is served at the root path.
"""

from __future__ import annotations

import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..bank import QuestionBank, load_bank, load_default_bank
from ..errors import (
    ClockError,
    QuestionExhaustedError,
    RiskProfilerError,
    SessionStateError,
)
from ..events import answer_event, derived_events, skip_event
from ..scoring import LatencyModel, LeadershipInputs, compute_result, result_to_dict
from ..seeds import derive_seed
from ..session import (
    AnswerValue,
    EmotionSample,
    SessionConfig,
    SessionState,
    current_question,
    skip_question,
    submit_answer,
)
from ..signing import encode_payload, load_or_create_key, sign_result
from . import schemas
from .store import (
    Account,
    AccountStore,
    DuplicateUserError,
    SessionStore,
    UnknownSessionError,
    UnknownUserError,
)


@dataclass
class Settings:
    data_dir: Path = field(default_factory=lambda: Path("./data"))
    bank_path: Path | None = None
    key_file: Path | None = None
    static_dir: Path | None = None
    disqualify_threshold: float = 0.5

    @classmethod
    def from_env(cls) -> "Settings":
        env = os.environ
        return cls(
            data_dir=Path(env.get("RISKPROFILER_DATA_DIR", "./data")),
            bank_path=Path(env["RISKPROFILER_BANK"]) if "RISKPROFILER_BANK" in env else None,
            key_file=Path(env["RISKPROFILER_KEY_FILE"]) if "RISKPROFILER_KEY_FILE" in env else None,
            static_dir=Path(env["RISKPROFILER_STATIC_DIR"]) if "RISKPROFILER_STATIC_DIR" in env else None,
        )


def _load_bank(settings: Settings) -> QuestionBank:
    if settings.bank_path is None:
        return load_default_bank()
    with open(settings.bank_path, "rb") as fh:
        fmt = "json" if settings.bank_path.suffix == ".json" else "lines"
        return load_bank(fh, fmt=fmt)


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "detail": detail})


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings.from_env()
    settings.data_dir.mkdir(parents=True, exist_ok=True)

    bank = _load_bank(settings)
    accounts = AccountStore(settings.data_dir)
    sessions = SessionStore(
        settings.data_dir,
        bank,
        SessionConfig(disqualify_threshold=settings.disqualify_threshold),
    )
    key_file = settings.key_file or settings.data_dir / "signing.key"
    signing_key, key_id = load_or_create_key(key_file)

    app = FastAPI(title="riskprofiler", version="0.1.0")
    app.state.settings = settings
    app.state.accounts = accounts
    app.state.sessions = sessions

    # auth is bearer-token only (no cookies), so a permissive policy is safe;
    # needed when the web client is developed against a separate dev server
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RiskProfilerError)
    async def _domain_error(request: Request, exc: RiskProfilerError):
        if isinstance(exc, SessionStateError):
            return _error(409, "wrong_state", str(exc))
        if isinstance(exc, ClockError):
            return _error(422, "clock_error", str(exc))
        if isinstance(exc, QuestionExhaustedError):
            return _error(409, "bank_exhausted", str(exc))
        return _error(422, "domain_error", str(exc))

    def authenticated(authorization: str = Header(default="")) -> Account:
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise UnknownUserError("missing bearer token")
        return accounts.by_token(token.strip())

    @app.exception_handler(UnknownUserError)
    async def _unknown_user(request: Request, exc: UnknownUserError):
        return _error(401, "unauthorized", "unknown or missing credentials")

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(request: Request, exc: UnknownSessionError):
        return _error(404, "unknown_session", f"no session {exc.args[0]!r}")

    @app.exception_handler(DuplicateUserError)
    async def _duplicate_user(request: Request, exc: DuplicateUserError):
        return _error(409, "duplicate_username", f"username {exc.args[0]!r} already exists")

    def owned_entry(session_id: str, account: Account):
        entry = sessions.get(session_id)
        if entry.session.username != account.username:
            raise UnknownSessionError(session_id)  # do not leak other users' ids
        return entry

    def summary_fields(session) -> dict:
        cfg = session.config
        return {
            "state": session.state.value,
            "answered": session.answered,
            "total_questions": session.total_questions,
            "revalidations_used": session.revalidations,
            "revalidations_remaining": max(0, cfg.max_revalidations - session.revalidations),
        }

    @app.post("/v1/users", response_model=schemas.CreateUserResponse, status_code=201)
    def create_user(body: schemas.CreateUserRequest):
        account = accounts.create(body.username, body.education_level, body.job_level)
        return schemas.CreateUserResponse(
            username=account.username,
            created_at_ms=account.created_at_ms,
            token=account.token,
            education_level=account.education_level,
            job_level=account.job_level,
        )

    @app.post("/v1/sessions", response_model=schemas.SessionSummary, status_code=201)
    def start_assessment(
        body: schemas.StartSessionRequest, account: Account = Depends(authenticated)
    ):
        if body.username != account.username:
            return _error(403, "forbidden", "token does not belong to that username")
        nonce = body.nonce or uuid.uuid4().hex
        seed = derive_seed(body.username, nonce)
        session = sessions.create(body.username, seed)
        return schemas.SessionSummary(
            session_id=session.session_id, username=session.username,
            **summary_fields(session),
        )

    @app.get("/v1/sessions/{session_id}/question", response_model=schemas.QuestionResponse)
    def get_question(session_id: str, account: Account = Depends(authenticated)):
        entry = owned_entry(session_id, account)
        with entry.lock:
            question = current_question(entry.session)
            fields_ = summary_fields(entry.session)
            return schemas.QuestionResponse(
                question_id=question.id,
                text=question.text,
                qtype=question.qtype.value,
                index=entry.session.cursor,
                answered=fields_["answered"],
                total_questions=fields_["total_questions"],
                revalidations_used=fields_["revalidations_used"],
                revalidations_remaining=fields_["revalidations_remaining"],
            )

    @app.post("/v1/sessions/{session_id}/answer", response_model=schemas.TransitionResponse)
    def post_answer(
        session_id: str,
        body: schemas.AnswerRequest,
        account: Account = Depends(authenticated),
    ):
        from ..emotion import aggregate_window

        if body.emotion is not None:
            emotion = EmotionSample(**body.emotion.model_dump())
        else:
            points = [
                (p.t_ms, EmotionSample(p.valence, p.arousal, p.confidence))
                for p in body.emotion_timeline or []
            ]
            emotion = aggregate_window(points)

        entry = owned_entry(session_id, account)
        with entry.lock:
            report = submit_answer(
                entry.session,
                answer=AnswerValue(body.answer),
                displayed_at=body.displayed_at,
                answered_at=body.answered_at,
                emotion=emotion,
            )
            events = [
                answer_event(
                    AnswerValue(body.answer), body.displayed_at, body.answered_at, emotion
                )
            ] + derived_events(report)
            sessions.append(entry, events)
            fields_ = summary_fields(entry.session)
            record = report.record
            return schemas.TransitionResponse(
                state=fields_["state"],
                cursor=report.cursor,
                answered=fields_["answered"],
                total_questions=fields_["total_questions"],
                revalidations_used=fields_["revalidations_used"],
                revalidations_remaining=fields_["revalidations_remaining"],
                latency_ms=record.latency_ms,
                granted=record.granted.value,
                flagged=record.flagged,
                appended_question_id=(
                    report.appended_question.id if report.appended_question else None
                ),
                completed=entry.session.state is SessionState.COMPLETED,
            )

    @app.post("/v1/sessions/{session_id}/skip", response_model=schemas.SkipResponse)
    def post_skip(session_id: str, account: Account = Depends(authenticated)):
        entry = owned_entry(session_id, account)
        with entry.lock:
            report = skip_question(entry.session)
            sessions.append(entry, [skip_event()] + derived_events(report))
            fields_ = summary_fields(entry.session)
            return schemas.SkipResponse(
                state=fields_["state"],
                cursor=report.cursor,
                total_questions=fields_["total_questions"],
                revalidations_used=fields_["revalidations_used"],
                revalidations_remaining=fields_["revalidations_remaining"],
                replacement_question_id=(
                    report.replacement_question.id if report.replacement_question else None
                ),
            )

    def completed_result(session_id: str, account: Account) -> dict:
        entry = owned_entry(session_id, account)
        with entry.lock:
            inputs = LeadershipInputs(
                education_level=account.education_level, job_level=account.job_level
            )
            bundle = compute_result(entry.session, inputs, LatencyModel())
            return result_to_dict(bundle)

    @app.get("/v1/sessions/{session_id}/result", response_model=schemas.ResultResponse)
    def get_result(session_id: str, account: Account = Depends(authenticated)):
        return completed_result(session_id, account)

    @app.get("/v1/sessions/{session_id}/qr", response_class=PlainTextResponse)
    def get_qr(session_id: str, account: Account = Depends(authenticated)):
        result = completed_result(session_id, account)
        payload = sign_result(
            result, signing_key, key_id, issued_at=int(time.time() * 1000)
        )
        return PlainTextResponse(encode_payload(payload))

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "bank_size": len(bank)}

    if settings.static_dir is not None and Path(settings.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="static")

    return app
