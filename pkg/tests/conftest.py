from __future__ import annotations

import pytest

from riskprofiler.bank import (
    MAJOR_TYPES,
    Question,
    QuestionBank,
    QuestionType,
    load_default_bank,
)
from riskprofiler.session import (
    AnswerValue,
    EmotionSample,
    Session,
    SessionState,
    start_session,
    submit_answer,
)

TYPE_CODES = {
    QuestionType.HA_NS: "HANS",
    QuestionType.RD_HA: "RDHA",
    QuestionType.NS_RD: "NSRD",
    QuestionType.NS_HA: "NSHA",
    QuestionType.HA_RD: "HARD",
    QuestionType.RD_NS: "RDNS",
}


def build_bank(per_major: int = 12, per_minor: int = 10) -> QuestionBank:
    """Smallest bank satisfying the capacity invariant by default."""
    questions = []
    for qtype in QuestionType:
        count = per_major if qtype in MAJOR_TYPES else per_minor
        for i in range(count):
            questions.append(
                Question(
                    id=f"{TYPE_CODES[qtype]}{i:02d}",
                    text=f"Test prompt {TYPE_CODES[qtype]} {i}?",
                    qtype=qtype,
                )
            )
    return QuestionBank(questions)


@pytest.fixture
def small_bank() -> QuestionBank:
    return build_bank()


@pytest.fixture(scope="session")
def default_bank() -> QuestionBank:
    return load_default_bank()


def emotion(valence: float = 0.2, arousal: float = 0.1, confidence: float = 0.9) -> EmotionSample:
    return EmotionSample(valence=valence, arousal=arousal, confidence=confidence)


def answer_all(
    session: Session,
    answer: AnswerValue = AnswerValue.YES,
    latency_ms: int = 3000,
    sample: EmotionSample | None = None,
) -> Session:
    """Answer every remaining question uniformly until the session closes."""
    sample = sample or emotion()
    t = 0
    while session.state is SessionState.ACTIVE:
        submit_answer(session, answer, t, t + latency_ms, sample)
        t += latency_ms
    return session


def completed_session(bank: QuestionBank, seed: int = 42, **kwargs) -> Session:
    return answer_all(start_session("tester", bank, seed), **kwargs)
