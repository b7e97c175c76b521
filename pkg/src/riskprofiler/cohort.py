"""Synthetic labeled cohorts for training, evaluation, and population studies.

A persona is a latent temperament (probability weights over the three
dimensions), a latency profile, an emotion disposition, and a noise level.
Sessions generate from it by inverting the scoring rule: on each question the
persona answers toward its preferred dimension of the pair, and the noise
level mixes that hard preference with a fair coin:

    P(answer grants first) = (1 - noise) * pref + noise * 0.5

where pref is 1, 0, or 0.5 by comparing the two weights. At noise 0 the
granted counts are exactly (20, 10, 0) in preference order, so counting bins
recovers the label on every session; at noise 1 answers are uniform.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .bank import Dimension, Question, QuestionBank, select_questionnaire
from .emotion import DISPOSITIONS, simulate_emotion
from .mlp import Dataset, LABEL_ORDER, encode_session, one_hot_label
from .scoring import TIE_ORDER
from .seeds import derive_seed
from .session import AnswerRecord, AnswerValue, granted_dimension

#: Weight sampling order; the Dirichlet components map onto these dimensions.
WEIGHT_ORDER = [Dimension.HA, Dimension.RD, Dimension.NS]

LATENCY_MEAN_RANGE_MS = (2000.0, 7000.0)
LATENCY_SIGMA_RANGE_MS = (200.0, 1200.0)

#: Characteristic emotion disposition per dominant dimension. Emotional
#: response tracks temperament (that premise is why emotions are captured at
#: all). Corruption is per question: with probability equal to the noise
#: level, a question's emotion draws from a uniformly random disposition
#: instead, so answers and emotions degrade on the same knob.
CHARACTERISTIC_DISPOSITIONS: dict[Dimension, str] = {
    Dimension.HA: "anxious",
    Dimension.NS: "excited",
    Dimension.RD: "calm-positive",
}


@dataclass(frozen=True)
class Persona:
    weights: dict[Dimension, float]
    latency_mean_ms: float
    latency_sigma_ms: float
    emotion_disposition: str
    noise: float

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9 or any(w < 0 for w in self.weights.values()):
            raise ValueError(f"weights must form a probability vector, got {self.weights}")
        if self.emotion_disposition not in DISPOSITIONS:
            raise ValueError(f"unknown disposition {self.emotion_disposition!r}")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise {self.noise} outside [0, 1]")

    @property
    def label(self) -> Dimension:
        """Dominant dimension, ties resolved by the scoring tie order."""
        return min(self.weights, key=lambda d: (-self.weights[d], TIE_ORDER.index(d)))


def sample_persona(rng: np.random.Generator, noise: float = 0.1) -> Persona:
    """Symmetric Dirichlet(1, 1, 1) weights plus uniform latency profile."""
    raw = rng.dirichlet(np.ones(3))
    weights = {d: float(w) for d, w in zip(WEIGHT_ORDER, raw)}
    # float Dirichlet output can miss 1.0 by an ulp; renormalize exactly
    total = sum(weights.values())
    weights = {d: w / total for d, w in weights.items()}
    label = min(weights, key=lambda d: (-weights[d], TIE_ORDER.index(d)))
    return Persona(
        weights=weights,
        latency_mean_ms=float(rng.uniform(*LATENCY_MEAN_RANGE_MS)),
        latency_sigma_ms=float(rng.uniform(*LATENCY_SIGMA_RANGE_MS)),
        emotion_disposition=CHARACTERISTIC_DISPOSITIONS[label],
        noise=noise,
    )


def _first_preference(persona: Persona, question: Question) -> float:
    w_first = persona.weights[question.qtype.first]
    w_second = persona.weights[question.qtype.second]
    if w_first > w_second:
        return 1.0
    if w_first < w_second:
        return 0.0
    return 0.5


def simulate_answer(
    persona: Persona,
    question: Question,
    rng: np.random.Generator,
    emotion_seed: int,
) -> AnswerRecord:
    """One synthetic reaction: answer choice, latency draw, emotion sample."""
    p_first = (1.0 - persona.noise) * _first_preference(persona, question) \
        + persona.noise * 0.5
    answer = AnswerValue.YES if rng.random() < p_first else AnswerValue.NO
    latency = int(round(rng.normal(persona.latency_mean_ms, persona.latency_sigma_ms)))
    latency = max(200, min(10_000, latency))
    disposition = persona.emotion_disposition
    if rng.random() < persona.noise:
        dispositions = sorted(DISPOSITIONS)
        disposition = dispositions[int(rng.integers(len(dispositions)))]
    emotion = simulate_emotion(disposition, persona.noise, question, answer, emotion_seed)
    return AnswerRecord(
        question_id=question.id,
        qtype=question.qtype,
        answer=answer,
        latency_ms=latency,
        emotion=emotion,
        granted=granted_dimension(question.qtype, answer),
    )


def generate_session(
    persona: Persona, bank: QuestionBank, seed: int
) -> tuple[list[AnswerRecord], Dimension]:
    """Produce the 30 standard answer records of one synthetic session."""
    questions = select_questionnaire(bank, seed)
    rng = np.random.default_rng(derive_seed(seed, "session-draws"))
    emotion_seed = derive_seed(seed, "emotion")
    records = [simulate_answer(persona, q, rng, emotion_seed) for q in questions]
    return records, persona.label


@dataclass
class Cohort:
    dataset: Dataset
    labels: list[Dimension]
    personas: list[Persona]

    def class_counts(self) -> dict[Dimension, int]:
        counts = Counter(self.labels)
        return {d: counts.get(d, 0) for d in LABEL_ORDER}


def generate_cohort(
    n: int, noise: float, seed: int, bank: QuestionBank | None = None
) -> Cohort:
    """Encode ``n`` synthetic sessions into a dataset with one-hot labels."""
    if n < 1:
        raise ValueError(f"cohort size must be at least 1, got {n}")
    if bank is None:
        from .bank import load_default_bank

        bank = load_default_bank()
    persona_rng = np.random.default_rng(derive_seed(seed, "personas"))
    features = np.zeros((n, 270))
    labels = np.zeros((n, 3))
    label_dims: list[Dimension] = []
    personas: list[Persona] = []
    for i in range(n):
        persona = sample_persona(persona_rng, noise=noise)
        records, label = generate_session(persona, bank, derive_seed(seed, "session", i))
        features[i] = encode_session(records)
        labels[i] = one_hot_label(label)
        label_dims.append(label)
        personas.append(persona)
    return Cohort(dataset=Dataset(features=features, labels=labels),
                  labels=label_dims, personas=personas)


def bin_count_label(records: Sequence[AnswerRecord]) -> Dimension:
    """Independent label oracle: tally granted dimensions and take the argmax."""
    counts = Counter(r.granted for r in records)
    return min(Dimension, key=lambda d: (-counts.get(d, 0), TIE_ORDER.index(d)))


def export_cohort(cohort: Cohort, path: Path | str) -> None:
    """Columnar text export: header then one comma-separated row per session."""
    header = ["label"] + [f"f{i:03d}" for i in range(270)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for label, row in zip(cohort.labels, cohort.dataset.features):
            writer.writerow([label.value] + [repr(float(v)) for v in row])


def load_cohort_file(path: Path | str) -> tuple[Dataset, list[Dimension]]:
    """Read a cohort export back into a dataset plus label list."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:1] != ["label"] or len(header) != 271:
            raise ValueError("not a cohort export: bad header")
        rows, dims = [], []
        for record in reader:
            dims.append(Dimension(record[0]))
            rows.append([float(v) for v in record[1:]])
    features = np.array(rows) if rows else np.zeros((0, 270))
    labels = np.array([one_hot_label(d) for d in dims]) if dims else np.zeros((0, 3))
    return Dataset(features=features, labels=labels), dims
