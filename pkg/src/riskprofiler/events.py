"""Append-only session event log and its replay.

Each session persists as JSON lines. Three event kinds drive state
(``start``, ``answer``, ``skip``); the engine's consequences are also logged
as informational events (``disqualify``, ``complete``, ``invalidate``) so the
log reads as a full audit trail. Replaying the driver events through the
engine with the recorded seed reconstructs the session exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .bank import QuestionBank
from .errors import EventLogError
from .session import (
    AnswerValue,
    EmotionSample,
    Session,
    SessionConfig,
    TransitionReport,
    skip_question,
    start_session,
    submit_answer,
)

LOG_VERSION = 1

DRIVER_EVENTS = {"start", "answer", "skip"}
DERIVED_EVENTS = {"disqualify", "complete", "invalidate"}


def start_event(session: Session) -> dict:
    return {
        "event": "start",
        "v": LOG_VERSION,
        "session_id": session.session_id,
        "username": session.username,
        "seed": session.seed,
        "disqualify_threshold": session.config.disqualify_threshold,
    }


def answer_event(
    answer: AnswerValue, displayed_at: int, answered_at: int, emotion: EmotionSample
) -> dict:
    return {
        "event": "answer",
        "answer": answer.value,
        "displayed_at": displayed_at,
        "answered_at": answered_at,
        "emotion": {
            "valence": emotion.valence,
            "arousal": emotion.arousal,
            "confidence": emotion.confidence,
        },
    }


def skip_event() -> dict:
    return {"event": "skip"}


def derived_events(report: TransitionReport) -> list[dict]:
    """Informational events implied by a transition, in emission order."""
    out: list[dict] = []
    if report.kind == "answer" and report.record is not None and report.record.flagged:
        event: dict = {"event": "disqualify", "question_id": report.record.question_id}
        if report.appended_question is not None:
            event["appended"] = report.appended_question.id
        out.append(event)
    if report.state.value == "Completed":
        out.append({"event": "complete"})
    if report.state.value == "Invalid":
        out.append({"event": "invalidate"})
    return out


def encode_event(event: dict) -> str:
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


def append_events(path: Path | str, events: Iterable[dict]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for event in events:
            fh.write(encode_event(event) + "\n")
        fh.flush()


def read_events(path: Path | str) -> list[dict]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise EventLogError(f"line {line_no}: invalid JSON: {exc}") from None
    return events


def replay(events: Iterable[dict], bank: QuestionBank) -> Session:
    """Rebuild a session by re-running the driver events through the engine."""
    iterator: Iterator[dict] = iter(events)
    try:
        head = next(iterator)
    except StopIteration:
        raise EventLogError("empty event log") from None
    if head.get("event") != "start":
        raise EventLogError(f"log must begin with a start event, got {head.get('event')!r}")
    try:
        session = start_session(
            username=head["username"],
            bank=bank,
            seed=head["seed"],
            session_id=head["session_id"],
            config=SessionConfig(disqualify_threshold=head["disqualify_threshold"]),
        )
    except KeyError as exc:
        raise EventLogError(f"start event missing field {exc.args[0]!r}") from None

    for event in iterator:
        kind = event.get("event")
        if kind == "answer":
            try:
                emotion = EmotionSample(**event["emotion"])
                submit_answer(
                    session,
                    answer=AnswerValue(event["answer"]),
                    displayed_at=event["displayed_at"],
                    answered_at=event["answered_at"],
                    emotion=emotion,
                )
            except KeyError as exc:
                raise EventLogError(f"answer event missing field {exc.args[0]!r}") from None
        elif kind == "skip":
            skip_question(session)
        elif kind == "start":
            raise EventLogError("duplicate start event")
        elif kind in DERIVED_EVENTS:
            continue
        else:
            raise EventLogError(f"unknown event kind {kind!r}")
    return session
