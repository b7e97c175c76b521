"""Pydantic request/response models for the /v1 JSON API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ErrorBody(BaseModel):
    code: str
    detail: str


class EmotionIn(BaseModel):
    valence: float = Field(ge=-1.0, le=1.0)
    arousal: float = Field(ge=-1.0, le=1.0)
    confidence: float = Field(ge=0.0, le=1.0)


class TimelinePointIn(EmotionIn):
    t_ms: int


class CreateUserRequest(BaseModel):
    username: str = Field(min_length=1, max_length=64)
    education_level: int = Field(ge=1, le=6)
    job_level: int = Field(ge=1, le=6)


class CreateUserResponse(BaseModel):
    username: str
    created_at_ms: int
    token: str
    education_level: int
    job_level: int


class StartSessionRequest(BaseModel):
    username: str
    nonce: Optional[str] = None  # supplied nonce makes the questionnaire reproducible


class SessionSummary(BaseModel):
    session_id: str
    username: str
    state: str
    answered: int
    total_questions: int
    revalidations_used: int
    revalidations_remaining: int


class QuestionResponse(BaseModel):
    question_id: str
    text: str
    qtype: str
    index: int
    answered: int
    total_questions: int
    revalidations_used: int
    revalidations_remaining: int


class AnswerRequest(BaseModel):
    answer: Literal["Yes", "No"]
    displayed_at: int = Field(ge=0)
    answered_at: int = Field(ge=0)
    emotion: Optional[EmotionIn] = None
    emotion_timeline: Optional[list[TimelinePointIn]] = None

    @model_validator(mode="after")
    def _exactly_one_emotion(self):
        if (self.emotion is None) == (self.emotion_timeline is None):
            raise ValueError("provide exactly one of 'emotion' or 'emotion_timeline'")
        if self.emotion_timeline is not None and not self.emotion_timeline:
            raise ValueError("'emotion_timeline' must not be empty")
        return self


class TransitionResponse(BaseModel):
    state: str
    cursor: int
    answered: int
    total_questions: int
    revalidations_used: int
    revalidations_remaining: int
    latency_ms: int
    granted: str
    flagged: bool
    appended_question_id: Optional[str] = None
    completed: bool


class SkipResponse(BaseModel):
    state: str
    cursor: int
    total_questions: int
    revalidations_used: int
    revalidations_remaining: int
    replacement_question_id: Optional[str] = None


class RiskProfileOut(BaseModel):
    primary: str
    secondary: str
    label: str
    coefficient: int
    bin_counts: dict[str, int]


class ThinkingTypeOut(BaseModel):
    band: str
    coefficient: int
    unusual: bool


class BiometricTypeOut(BaseModel):
    category: int
    label: str


class ResultResponse(BaseModel):
    risk_profile: RiskProfileOut
    truthfulness: float
    risk_tolerance: float
    avg_latency_ms: float
    thinking_type: ThinkingTypeOut
    leadership: float
    biometric_type: BiometricTypeOut
    confidence: float
    worthiness_raw: float
    worthiness_pct: float
