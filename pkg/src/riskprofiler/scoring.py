"""Scoring: every per-session parameter and the final worthiness index.

All functions here are pure and deterministic. A completed session reduces
to a result bundle:

- risk profile: bin counts of granted dimensions -> (primary, secondary)
  pair with a fixed coefficient 1..6;
- truthfulness: 30 / (30 + revalidations), i.e. 100% down to 83.33%;
- thinking type: the average latency bucketed into five bands XS..XL with
  coefficients 1..5;
- biometric type: four emotion categories, from a categorical label or from
  the mean valence-arousal quadrant;
- confidence: mean recognizer confidence over non-flagged records;
- worthiness index: (RP x T) x TT x (BT x C), range 0..120, normalized into
  [0.20, 1.00] for display.

Leadership ((latency / median) x education x job, capped at 120) is reported
alongside but does not enter the worthiness index.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .bank import Dimension
from .errors import SessionStateError
from .session import AnswerRecord, Session, SessionState, average_latency_ms

#: Ties in bin counts resolve risk-seeking first: NS beats RD beats HA.
TIE_ORDER = [Dimension.NS, Dimension.RD, Dimension.HA]

#: Social-valuation coefficient for each ordered (primary, secondary) pair.
RISK_PROFILE_COEFFICIENTS = {
    (Dimension.HA, Dimension.RD): 1,  # Averse Dependent
    (Dimension.HA, Dimension.NS): 2,  # Averse Taker
    (Dimension.RD, Dimension.HA): 3,  # Dependent Averse
    (Dimension.RD, Dimension.NS): 4,  # Dependent Taker
    (Dimension.NS, Dimension.HA): 5,  # Taker Averse
    (Dimension.NS, Dimension.RD): 6,  # Taker Dependent
}

STANDARD_COUNT = 30
WORTHINESS_MAX = 120.0
WORTHINESS_PCT_FLOOR = 0.20


@dataclass(frozen=True)
class RiskProfile:
    primary: Dimension
    secondary: Dimension
    coefficient: int
    bin_counts: dict[Dimension, int]

    @property
    def label(self) -> str:
        return f"{self.primary.alias} {self.secondary.alias}"


class LatencyBand(str, Enum):
    XS = "XS"
    S = "S"
    M = "M"
    L = "L"
    XL = "XL"


BAND_COEFFICIENTS = {
    LatencyBand.XS: 1,
    LatencyBand.S: 2,
    LatencyBand.M: 3,
    LatencyBand.L: 4,
    LatencyBand.XL: 5,
}


@dataclass(frozen=True)
class ThinkingType:
    band: LatencyBand
    coefficient: int
    unusual: bool


@dataclass(frozen=True)
class LatencyModel:
    """Population latency assumption the five bands derive from.

    With the defaults (mu 3000 ms, sigma 1000 ms) the interior band edges sit
    at mu +/- sigma/2 and mu +/- 3 sigma/2, i.e. 1500 / 2500 / 3500 / 4500 ms,
    and the unusual range is anything below mu - sigma (2000 ms) or above
    mu + 4 sigma (7000 ms). Values outside the outermost edges clamp into
    XS / XL rather than erroring.
    """

    mu_ms: float = 3000.0
    sigma_ms: float = 1000.0

    def __post_init__(self):
        if self.sigma_ms <= 0:
            raise ValueError("sigma_ms must be positive")

    @property
    def band_edges_ms(self) -> tuple[float, float, float, float]:
        return (
            self.mu_ms - 1.5 * self.sigma_ms,
            self.mu_ms - 0.5 * self.sigma_ms,
            self.mu_ms + 0.5 * self.sigma_ms,
            self.mu_ms + 1.5 * self.sigma_ms,
        )

    @property
    def unusual_below_ms(self) -> float:
        return self.mu_ms - self.sigma_ms

    @property
    def unusual_above_ms(self) -> float:
        return self.mu_ms + 4.0 * self.sigma_ms


class BiometricLabel(str, Enum):
    CONTEMPT_DISGUST = "ContemptDisgust"
    ANGER_FEAR = "AngerFear"
    HAPPINESS_SADNESS = "HappinessSadness"
    SURPRISE_NEUTRAL = "SurpriseNeutral"


_CATEGORY_LABELS = {
    1: BiometricLabel.CONTEMPT_DISGUST,
    2: BiometricLabel.ANGER_FEAR,
    3: BiometricLabel.HAPPINESS_SADNESS,
    4: BiometricLabel.SURPRISE_NEUTRAL,
}

_EMOTION_CATEGORIES = {
    "Contempt": 1,
    "Disgust": 1,
    "Anger": 2,
    "Fear": 2,
    "Happiness": 3,
    "Sadness": 3,
    "Surprise": 4,
    "Neutral": 4,
}


@dataclass(frozen=True)
class BiometricType:
    category: int
    label: BiometricLabel

    def __post_init__(self):
        if _CATEGORY_LABELS.get(self.category) is not self.label:
            raise ValueError(f"category {self.category} does not match {self.label}")


@dataclass(frozen=True)
class LeadershipInputs:
    education_level: int
    job_level: int

    def __post_init__(self):
        for name, level in (("education_level", self.education_level),
                            ("job_level", self.job_level)):
            if not isinstance(level, int) or not 1 <= level <= 6:
                raise ValueError(f"{name} must be an integer in [1, 6], got {level!r}")


@dataclass(frozen=True)
class ResultBundle:
    risk_profile: RiskProfile
    truthfulness: float
    risk_tolerance: float  # risk-profile coefficient x truthfulness
    avg_latency_ms: float
    thinking_type: ThinkingType
    leadership: float
    biometric_type: BiometricType
    confidence: float
    worthiness_raw: float
    worthiness_pct: float


def risk_profile(records: Sequence[AnswerRecord]) -> RiskProfile:
    """Bin the granted dimensions and rank them into the profile pair."""
    if not records:
        raise ValueError("cannot profile an empty record list")
    counts = Counter(r.granted for r in records)
    bin_counts = {d: counts.get(d, 0) for d in Dimension}
    ranked = sorted(Dimension, key=lambda d: (-bin_counts[d], TIE_ORDER.index(d)))
    primary, secondary = ranked[0], ranked[1]
    return RiskProfile(
        primary=primary,
        secondary=secondary,
        coefficient=RISK_PROFILE_COEFFICIENTS[(primary, secondary)],
        bin_counts=bin_counts,
    )


def truthfulness(revalidations: int) -> float:
    """30 / (30 + R): 100% with no revalidations down to 83.33% at the cap."""
    if not 0 <= revalidations <= 6:
        raise ValueError(f"revalidations {revalidations} outside [0, 6]")
    return STANDARD_COUNT / (STANDARD_COUNT + revalidations)


def thinking_type(avg_latency_ms: float, model: LatencyModel | None = None) -> ThinkingType:
    """Bucket the average latency into one of the five half-open bands."""
    if avg_latency_ms <= 0:
        raise ValueError(f"latency must be positive, got {avg_latency_ms}")
    model = model or LatencyModel()
    e1, e2, e3, e4 = model.band_edges_ms
    if avg_latency_ms < e1:
        band = LatencyBand.XS
    elif avg_latency_ms < e2:
        band = LatencyBand.S
    elif avg_latency_ms < e3:
        band = LatencyBand.M
    elif avg_latency_ms < e4:
        band = LatencyBand.L
    else:
        band = LatencyBand.XL
    unusual = avg_latency_ms < model.unusual_below_ms or avg_latency_ms > model.unusual_above_ms
    return ThinkingType(band=band, coefficient=BAND_COEFFICIENTS[band], unusual=unusual)


def biometric_type_categorical(dominant_emotion: str) -> BiometricType:
    """Map one of the eight emotion labels onto the four categories."""
    try:
        category = _EMOTION_CATEGORIES[dominant_emotion]
    except KeyError:
        raise ValueError(f"unknown emotion label {dominant_emotion!r}") from None
    return BiometricType(category=category, label=_CATEGORY_LABELS[category])


def biometric_type_continuous(mean_valence: float, mean_arousal: float) -> BiometricType:
    """Quadrant rule on the valence-arousal plane; boundaries go to the >= side."""
    if not -1.0 <= mean_valence <= 1.0:
        raise ValueError(f"mean valence {mean_valence} outside [-1, 1]")
    if not -1.0 <= mean_arousal <= 1.0:
        raise ValueError(f"mean arousal {mean_arousal} outside [-1, 1]")
    if mean_valence < 0:
        category = 1 if mean_arousal < 0 else 2
    else:
        category = 3 if mean_arousal < 0 else 4
    return BiometricType(category=category, label=_CATEGORY_LABELS[category])


def leadership(
    avg_latency_ms: float,
    inputs: LeadershipInputs,
    model: LatencyModel | None = None,
) -> float:
    """(latency / population median) x education x job, capped into [0, 120]."""
    model = model or LatencyModel()
    if not 0 < avg_latency_ms <= 10_000:
        raise ValueError(f"latency {avg_latency_ms} outside (0, 10000]")
    score = (avg_latency_ms / model.mu_ms) * inputs.education_level * inputs.job_level
    return max(0.0, min(120.0, score))


def session_confidence(records: Sequence[AnswerRecord]) -> float:
    """Mean recognizer confidence over records whose emotion qualified."""
    kept = [r.emotion.confidence for r in records if not r.flagged]
    if not kept:
        raise ValueError("every record is flagged; no confidence to aggregate")
    return sum(kept) / len(kept)


def mean_emotion(records: Sequence[AnswerRecord]) -> tuple[float, float]:
    """Mean valence and arousal over non-flagged records."""
    kept = [r for r in records if not r.flagged]
    if not kept:
        raise ValueError("every record is flagged; no emotion to aggregate")
    n = len(kept)
    return (sum(r.emotion.valence for r in kept) / n,
            sum(r.emotion.arousal for r in kept) / n)


def worthiness_raw(
    rp_coefficient: int,
    truthfulness_score: float,
    tt_coefficient: int,
    bt_category: int,
    confidence: float,
) -> float:
    """(RP x T) x TT x (BT x C); ranges over [0, 120]."""
    return (rp_coefficient * truthfulness_score) * tt_coefficient * (bt_category * confidence)


def worthiness_pct(raw: float) -> float:
    """Normalize the raw index by its 120 maximum, clamped into [0.20, 1.00]."""
    return max(WORTHINESS_PCT_FLOOR, min(1.0, raw / WORTHINESS_MAX))


def compute_result(
    session: Session,
    inputs: LeadershipInputs,
    model: LatencyModel | None = None,
) -> ResultBundle:
    """Assemble the full result bundle for a completed session."""
    if session.state is not SessionState.COMPLETED:
        raise SessionStateError(f"session is {session.state.value}, not Completed")
    model = model or LatencyModel()

    rp = risk_profile(session.records)
    t = truthfulness(session.revalidations)
    avg_latency = average_latency_ms(session)
    tt = thinking_type(avg_latency, model)
    ls = leadership(avg_latency, inputs, model)
    valence, arousal = mean_emotion(session.records)
    bt = biometric_type_continuous(valence, arousal)
    conf = session_confidence(session.records)
    raw = worthiness_raw(rp.coefficient, t, tt.coefficient, bt.category, conf)

    return ResultBundle(
        risk_profile=rp,
        truthfulness=t,
        risk_tolerance=rp.coefficient * t,
        avg_latency_ms=avg_latency,
        thinking_type=tt,
        leadership=ls,
        biometric_type=bt,
        confidence=conf,
        worthiness_raw=raw,
        worthiness_pct=worthiness_pct(raw),
    )


def _round4(x: float) -> float:
    # round-half-even at the serialization boundary only
    return round(x, 4)


def result_to_dict(bundle: ResultBundle) -> dict:
    """Documented JSON shape of a result bundle, scores rounded to 4 places."""
    return {
        "risk_profile": {
            "primary": bundle.risk_profile.primary.value,
            "secondary": bundle.risk_profile.secondary.value,
            "label": bundle.risk_profile.label,
            "coefficient": bundle.risk_profile.coefficient,
            "bin_counts": {d.value: bundle.risk_profile.bin_counts[d] for d in Dimension},
        },
        "truthfulness": _round4(bundle.truthfulness),
        "risk_tolerance": _round4(bundle.risk_tolerance),
        "avg_latency_ms": _round4(bundle.avg_latency_ms),
        "thinking_type": {
            "band": bundle.thinking_type.band.value,
            "coefficient": bundle.thinking_type.coefficient,
            "unusual": bundle.thinking_type.unusual,
        },
        "leadership": _round4(bundle.leadership),
        "biometric_type": {
            "category": bundle.biometric_type.category,
            "label": bundle.biometric_type.label.value,
        },
        "confidence": _round4(bundle.confidence),
        "worthiness_raw": _round4(bundle.worthiness_raw),
        "worthiness_pct": _round4(bundle.worthiness_pct),
    }


def result_to_json(bundle: ResultBundle) -> str:
    """Canonical serialization: sorted keys, no whitespace."""
    return json.dumps(result_to_dict(bundle), sort_keys=True, separators=(",", ":"))
