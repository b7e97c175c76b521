"""Valence-arousal provider contract and its deterministic simulator.

The real recognizer is an external video model; here it is an interface:
anything that can estimate an emotion timeline for a question's capture
window. The shipped simulator draws persona-conditioned samples so the rest
of the system is fully testable offline. Window timing constants follow the
snippet/sequence semantics of the video model: one estimate per ~400 ms
snippet, ~2 s sequences of 64 snippet frames.

Disposition table (mean valence, mean arousal) used by the simulator:

============== ======== ========
key             valence  arousal
============== ======== ========
calm-positive      0.45    -0.25
excited            0.60     0.65
anxious           -0.45     0.55
irritable         -0.60     0.30
gloomy            -0.50    -0.35
neutral            0.00     0.00
============== ======== ========
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Protocol, Sequence

from .bank import Question
from .seeds import derive_seed
from .session import AnswerValue, EmotionSample


@dataclass(frozen=True)
class FrameWindow:
    """Capture-window constants of the upstream video emotion model."""

    frames_per_snippet: int = 13
    snippet_span_ms: float = 400.0
    sequence_length: int = 64
    sequence_span_ms: float = 2000.0


FRAME_WINDOW = FrameWindow()

DISPOSITIONS: dict[str, tuple[float, float]] = {
    "calm-positive": (0.45, -0.25),
    "excited": (0.60, 0.65),
    "anxious": (-0.45, 0.55),
    "irritable": (-0.60, 0.30),
    "gloomy": (-0.50, -0.35),
    "neutral": (0.00, 0.00),
}

#: Standard deviation of the valence/arousal jitter at noise level 1.
NOISE_SCALE = 0.35


@dataclass(frozen=True)
class EmotionTimeline:
    """Timestamped samples across one capture window, strictly increasing."""

    samples: tuple[tuple[int, EmotionSample], ...]

    def __post_init__(self):
        for (t0, _), (t1, _) in zip(self.samples, self.samples[1:]):
            if t1 <= t0:
                raise ValueError(f"timestamps not strictly increasing: {t0} -> {t1}")

    def __len__(self) -> int:
        return len(self.samples)


class EmotionProvider(Protocol):
    """Anything that can estimate emotions over a question's capture window."""

    def estimate(self, start_ms: int, end_ms: int) -> EmotionTimeline: ...


def _clamp(x: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return max(lo, min(hi, x))


def simulate_emotion(
    disposition: str,
    noise: float,
    question: Question,
    answer: AnswerValue,
    seed: int,
) -> EmotionSample:
    """Draw one persona-conditioned sample; pure in all five arguments.

    At noise 0 the returned valence/arousal equal the disposition means
    exactly and confidence is 1. Rising noise jitters the coordinates
    (seeded Gaussian, clamped into [-1, 1]) and erodes confidence down to
    1 - noise at worst.
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise {noise} outside [0, 1]")
    mean_v, mean_a = DISPOSITIONS[disposition]
    rng = random.Random(derive_seed(seed, disposition, question.id, answer.value))
    valence = _clamp(mean_v + noise * NOISE_SCALE * rng.gauss(0.0, 1.0))
    arousal = _clamp(mean_a + noise * NOISE_SCALE * rng.gauss(0.0, 1.0))
    confidence = 1.0 - noise * rng.random()
    return EmotionSample(valence=valence, arousal=arousal, confidence=confidence)


@dataclass(frozen=True)
class SimulatedEmotionProvider:
    """Deterministic stand-in for the video recognizer.

    Emits one sample per snippet span across the requested window; the same
    (seed, window) always yields the same timeline.
    """

    disposition: str = "neutral"
    noise: float = 0.1
    seed: int = 0
    window: FrameWindow = FRAME_WINDOW

    def estimate(self, start_ms: int, end_ms: int) -> EmotionTimeline:
        if end_ms <= start_ms:
            raise ValueError(f"window end {end_ms} not after start {start_ms}")
        span = self.window.snippet_span_ms
        if end_ms - start_ms < span:
            raise ValueError(
                f"window of {end_ms - start_ms} ms is shorter than one {span} ms snippet"
            )
        mean_v, mean_a = DISPOSITIONS[self.disposition]
        count = int((end_ms - start_ms) // span)
        samples = []
        for k in range(count):
            rng = random.Random(derive_seed(self.seed, self.disposition, start_ms, end_ms, k))
            sample = EmotionSample(
                valence=_clamp(mean_v + self.noise * NOISE_SCALE * rng.gauss(0.0, 1.0)),
                arousal=_clamp(mean_a + self.noise * NOISE_SCALE * rng.gauss(0.0, 1.0)),
                confidence=1.0 - self.noise * rng.random(),
            )
            samples.append((int(start_ms + k * span), sample))
        return EmotionTimeline(samples=tuple(samples))


def aggregate_window(timeline: EmotionTimeline | Sequence[tuple[int, EmotionSample]]) -> EmotionSample:
    """Reduce a timeline to one sample by the component-wise mean."""
    samples = timeline.samples if isinstance(timeline, EmotionTimeline) else tuple(timeline)
    if not samples:
        raise ValueError("cannot aggregate an empty timeline")
    n = len(samples)
    return EmotionSample(
        valence=sum(s.valence for _, s in samples) / n,
        arousal=sum(s.arousal for _, s in samples) / n,
        confidence=sum(s.confidence for _, s in samples) / n,
    )
