"""Assessment session state machine.

One session serves a 30-question selection, records each answer together
with its latency and an emotion sample, and tracks revalidations: a skip
replaces the current question in place, a disqualified emotion keeps the
(flagged) record and appends a same-type question at the end. Both count
toward the shared budget of 6; a 7th revalidation invalidates the session.
"""

from __future__ import annotations

import random
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .bank import (
    Dimension,
    MAX_REVALIDATIONS,
    Question,
    QuestionBank,
    QuestionType,
    draw_revalidation,
    select_questionnaire,
)
from .errors import ClockError, EmptySessionError, SessionStateError
from .seeds import derive_seed

LATENCY_MIN_MS = 200
LATENCY_MAX_MS = 10_000

#: Confidence below this (strictly) disqualifies an emotion record.
DEFAULT_DISQUALIFY_THRESHOLD = 0.5


class AnswerValue(str, Enum):
    YES = "Yes"
    NO = "No"


@dataclass(frozen=True)
class EmotionSample:
    """One valence-arousal estimate with the recognizer's confidence."""

    valence: float
    arousal: float
    confidence: float

    def __post_init__(self):
        if not -1.0 <= self.valence <= 1.0:
            raise ValueError(f"valence {self.valence} outside [-1, 1]")
        if not -1.0 <= self.arousal <= 1.0:
            raise ValueError(f"arousal {self.arousal} outside [-1, 1]")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


def granted_dimension(qtype: QuestionType, answer: AnswerValue) -> Dimension:
    """Yes grants the first dimension of the pair, No the second."""
    return qtype.first if answer is AnswerValue.YES else qtype.second


def clamp_latency(latency_ms: int) -> int:
    return max(LATENCY_MIN_MS, min(LATENCY_MAX_MS, int(latency_ms)))


def is_emotion_disqualified(
    emotion: EmotionSample, threshold: float = DEFAULT_DISQUALIFY_THRESHOLD
) -> bool:
    """True iff the recognizer's confidence falls strictly below ``threshold``."""
    return emotion.confidence < threshold


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    qtype: QuestionType
    answer: AnswerValue
    latency_ms: int
    emotion: EmotionSample
    granted: Dimension
    flagged: bool = False

    def __post_init__(self):
        if not LATENCY_MIN_MS <= self.latency_ms <= LATENCY_MAX_MS:
            raise ValueError(f"latency {self.latency_ms} outside clamp range")
        expected = granted_dimension(self.qtype, self.answer)
        if self.granted is not expected:
            raise ValueError(
                f"granted {self.granted} contradicts {self.qtype.value}/{self.answer.value}"
            )


class SessionState(str, Enum):
    ACTIVE = "Active"
    COMPLETED = "Completed"
    INVALID = "Invalid"


@dataclass
class SessionConfig:
    disqualify_threshold: float = DEFAULT_DISQUALIFY_THRESHOLD
    max_revalidations: int = MAX_REVALIDATIONS


@dataclass
class TransitionReport:
    """What a submit/skip did: new state plus whatever question it drew."""

    kind: str  # "answer" or "skip"
    state: SessionState
    revalidations: int
    cursor: int
    record: Optional[AnswerRecord] = None
    appended_question: Optional[Question] = None
    replacement_question: Optional[Question] = None


@dataclass
class Session:
    session_id: str
    username: str
    seed: int
    bank: QuestionBank = field(repr=False)
    config: SessionConfig = field(default_factory=SessionConfig)
    questionnaire: list[Question] = field(default_factory=list)
    cursor: int = 0
    records: list[AnswerRecord] = field(default_factory=list)
    revalidations: int = 0
    state: SessionState = SessionState.ACTIVE
    used_ids: set[str] = field(default_factory=set, repr=False)
    _draw_rng: random.Random = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def total_questions(self) -> int:
        return len(self.questionnaire)

    @property
    def answered(self) -> int:
        return len(self.records)


def start_session(
    username: str,
    bank: QuestionBank,
    seed: int,
    session_id: str | None = None,
    config: SessionConfig | None = None,
) -> Session:
    """Select a questionnaire and open an active session at question 0."""
    questionnaire = select_questionnaire(bank, seed)
    session = Session(
        session_id=session_id or uuid.uuid4().hex,
        username=username,
        seed=seed,
        bank=bank,
        config=config or SessionConfig(),
        questionnaire=questionnaire,
        used_ids={q.id for q in questionnaire},
        _draw_rng=random.Random(derive_seed(seed, "revalidation-draws")),
    )
    return session


def current_question(session: Session) -> Question:
    if session.state is not SessionState.ACTIVE:
        raise SessionStateError(f"session is {session.state.value}, not Active")
    return session.questionnaire[session.cursor]


def submit_answer(
    session: Session,
    answer: AnswerValue,
    displayed_at: int,
    answered_at: int,
    emotion: EmotionSample,
) -> TransitionReport:
    """Record the answer to the current question and advance the session.

    A disqualified emotion keeps the record (flagged) and appends one fresh
    same-type question at the end of the questionnaire, spending one
    revalidation. Latency is clamped into [200, 10000] ms.
    """
    if session.state is not SessionState.ACTIVE:
        raise SessionStateError(f"session is {session.state.value}, not Active")
    if answered_at < displayed_at:
        raise ClockError(
            f"answered_at {answered_at} precedes displayed_at {displayed_at}"
        )

    question = session.questionnaire[session.cursor]
    flagged = is_emotion_disqualified(emotion, session.config.disqualify_threshold)

    appended: Question | None = None
    will_invalidate = False
    if flagged:
        if session.revalidations + 1 > session.config.max_revalidations:
            will_invalidate = True
        else:
            appended = draw_revalidation(
                session.bank, question.qtype, session.used_ids, session._draw_rng
            )

    record = AnswerRecord(
        question_id=question.id,
        qtype=question.qtype,
        answer=answer,
        latency_ms=clamp_latency(answered_at - displayed_at),
        emotion=emotion,
        granted=granted_dimension(question.qtype, answer),
        flagged=flagged,
    )
    session.records.append(record)
    if flagged:
        session.revalidations += 1
    if will_invalidate:
        session.state = SessionState.INVALID
    elif appended is not None:
        session.questionnaire.append(appended)
        session.used_ids.add(appended.id)

    session.cursor += 1
    if session.state is SessionState.ACTIVE and session.cursor >= len(session.questionnaire):
        session.state = SessionState.COMPLETED

    return TransitionReport(
        kind="answer",
        state=session.state,
        revalidations=session.revalidations,
        cursor=session.cursor,
        record=record,
        appended_question=appended,
    )


def skip_question(session: Session) -> TransitionReport:
    """Replace the current question in place with a fresh same-type one."""
    if session.state is not SessionState.ACTIVE:
        raise SessionStateError(f"session is {session.state.value}, not Active")

    if session.revalidations + 1 > session.config.max_revalidations:
        session.revalidations += 1
        session.state = SessionState.INVALID
        return TransitionReport(
            kind="skip",
            state=session.state,
            revalidations=session.revalidations,
            cursor=session.cursor,
        )

    question = session.questionnaire[session.cursor]
    replacement = draw_revalidation(
        session.bank, question.qtype, session.used_ids, session._draw_rng
    )
    session.revalidations += 1
    session.questionnaire[session.cursor] = replacement
    session.used_ids.add(replacement.id)
    return TransitionReport(
        kind="skip",
        state=session.state,
        revalidations=session.revalidations,
        cursor=session.cursor,
        replacement_question=replacement,
    )


def average_latency_ms(session: Session) -> float:
    """Mean latency over every recorded answer, revalidations included."""
    if not session.records:
        raise EmptySessionError("session has no answer records")
    return sum(r.latency_ms for r in session.records) / len(session.records)
