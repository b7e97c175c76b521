"""Question bank: storage, validation, and balanced questionnaire selection.

A question is a dichotomous prompt tagged with an ordered pair of temperament
dimensions. Answering Yes grants the first dimension of the pair, No grants
the second. Three of the six pairs are "major" (straightforward situations)
and are drawn more often than the three "minor" pairs.

Bank file format (one record per line, UTF-8)::

    id|type|M-or-m|text

where ``type`` is one of HA/NS, RD/HA, NS/RD, NS/HA, HA/RD, RD/NS and the
third field is ``M`` for major types, ``m`` for minor. ``#`` lines are
comments. A JSON array of ``{"id", "type", "major", "text"}`` objects is
accepted as an alternative representation of the same records.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

from .errors import (
    BankCapacityError,
    BankParseError,
    BankValidationError,
    QuestionExhaustedError,
)


class Dimension(str, Enum):
    """The three temperament dimensions / scoring bins."""

    HA = "HA"
    NS = "NS"
    RD = "RD"

    @property
    def alias(self) -> str:
        return _ALIASES[self]


_ALIASES = {Dimension.HA: "Averse", Dimension.NS: "Taker", Dimension.RD: "Dependent"}


class QuestionType(str, Enum):
    """Ordered dimension pair; Yes grants the first dimension, No the second.

    Declaration order is the canonical type order used for selection and
    feature encoding: majors first, then minors.
    """

    HA_NS = "HA/NS"
    RD_HA = "RD/HA"
    NS_RD = "NS/RD"
    NS_HA = "NS/HA"
    HA_RD = "HA/RD"
    RD_NS = "RD/NS"

    @property
    def first(self) -> Dimension:
        return Dimension(self.value.split("/")[0])

    @property
    def second(self) -> Dimension:
        return Dimension(self.value.split("/")[1])

    @property
    def major(self) -> bool:
        return self in MAJOR_TYPES


MAJOR_TYPES = frozenset({QuestionType.HA_NS, QuestionType.RD_HA, QuestionType.NS_RD})
MINOR_TYPES = frozenset({QuestionType.NS_HA, QuestionType.HA_RD, QuestionType.RD_NS})

#: Canonical type order (majors, then minors) shared by selection and encoding.
TYPE_ORDER = list(QuestionType)

#: Items drawn per type in one 30-question selection: 6 per major, 4 per minor.
SELECTION_QUOTA = {t: (6 if t in MAJOR_TYPES else 4) for t in QuestionType}

#: A session may replace or append at most this many questions.
MAX_REVALIDATIONS = 6

STANDARD_QUESTION_COUNT = sum(SELECTION_QUOTA.values())  # 30


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    qtype: QuestionType

    @property
    def major(self) -> bool:
        return self.qtype.major


class QuestionBank:
    """Immutable, validated collection of questions indexed by type."""

    def __init__(self, questions: Iterable[Question]):
        self.questions: tuple[Question, ...] = tuple(questions)
        self.by_type: dict[QuestionType, tuple[Question, ...]] = {}
        seen: dict[str, Question] = {}
        for q in self.questions:
            if not q.text.strip():
                raise BankValidationError(f"question {q.id!r} has empty text")
            if q.id in seen:
                raise BankValidationError(f"duplicate question id {q.id!r}")
            seen[q.id] = q
        for t in QuestionType:
            group = tuple(q for q in self.questions if q.qtype == t)
            needed = SELECTION_QUOTA[t] + MAX_REVALIDATIONS
            if len(group) < needed:
                raise BankCapacityError(
                    f"type {t.value} has {len(group)} questions, needs at least {needed}",
                    qtype=t,
                )
            self.by_type[t] = group

    def __len__(self) -> int:
        return len(self.questions)

    def get(self, question_id: str) -> Question:
        for q in self.questions:
            if q.id == question_id:
                return q
        raise KeyError(question_id)


def _parse_line_record(line: str, record_no: int) -> Question:
    parts = line.split("|", 3)
    if len(parts) != 4:
        raise BankParseError(f"expected 4 '|'-separated fields, got {len(parts)}", record_no)
    qid, type_str, flag, text = (p.strip() for p in parts)
    if not qid:
        raise BankParseError("empty id field", record_no)
    try:
        qtype = QuestionType(type_str)
    except ValueError:
        raise BankParseError(f"unknown question type {type_str!r}", record_no) from None
    if flag not in ("M", "m"):
        raise BankParseError(f"major flag must be 'M' or 'm', got {flag!r}", record_no)
    if (flag == "M") != qtype.major:
        raise BankParseError(
            f"major flag {flag!r} inconsistent with type {qtype.value}", record_no
        )
    if not text:
        raise BankParseError("empty text field", record_no)
    return Question(id=qid, text=text, qtype=qtype)


def _parse_json_record(obj: object, record_no: int) -> Question:
    if not isinstance(obj, dict):
        raise BankParseError("record is not a JSON object", record_no)
    try:
        qid, type_str, major, text = obj["id"], obj["type"], obj["major"], obj["text"]
    except KeyError as exc:
        raise BankParseError(f"missing field {exc.args[0]!r}", record_no) from None
    if not isinstance(qid, str) or not qid:
        raise BankParseError("id must be a non-empty string", record_no)
    try:
        qtype = QuestionType(type_str)
    except ValueError:
        raise BankParseError(f"unknown question type {type_str!r}", record_no) from None
    if not isinstance(major, bool):
        raise BankParseError("major must be a boolean", record_no)
    if major != qtype.major:
        raise BankParseError(f"major flag inconsistent with type {qtype.value}", record_no)
    if not isinstance(text, str) or not text.strip():
        raise BankParseError("text must be a non-empty string", record_no)
    return Question(id=qid, text=text, qtype=qtype)


def load_bank(source: IO[bytes] | IO[str], fmt: str = "lines") -> QuestionBank:
    """Load and validate a bank from a readable stream.

    ``fmt`` is ``"lines"`` for the pipe-separated format or ``"json"`` for
    the JSON array form.
    """
    raw = source.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BankParseError(f"stream is not valid UTF-8: {exc}", 0) from None

    questions: list[Question] = []
    if fmt == "lines":
        for line_no, line in enumerate(raw.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            questions.append(_parse_line_record(stripped, line_no))
    elif fmt == "json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BankParseError(f"invalid JSON: {exc}", 0) from None
        if not isinstance(data, list):
            raise BankParseError("top-level JSON value must be an array", 0)
        for idx, obj in enumerate(data, start=1):
            questions.append(_parse_json_record(obj, idx))
    else:
        raise ValueError(f"unknown bank format {fmt!r}")

    return QuestionBank(questions)


def save_bank(bank: QuestionBank, sink: IO[str]) -> None:
    """Write a bank in the line format; ``load_bank`` round-trips it."""
    for q in bank.questions:
        flag = "M" if q.major else "m"
        sink.write(f"{q.id}|{q.qtype.value}|{flag}|{q.text}\n")


def select_questionnaire(bank: QuestionBank, seed: int) -> list[Question]:
    """Select the 30-item questionnaire for one session.

    Quotas: 6 items per major type, 4 per minor (18 major / 12 minor), which
    also puts each dimension in first position exactly 10 times. The draw and
    the final shuffle both come from ``random.Random(seed)`` over id-sorted
    candidate lists, so a seed fully determines the questionnaire.
    """
    rng = random.Random(seed)
    selected: list[Question] = []
    for t in TYPE_ORDER:
        candidates = sorted(bank.by_type.get(t, ()), key=lambda q: q.id)
        quota = SELECTION_QUOTA[t]
        if len(candidates) < quota:
            raise BankCapacityError(
                f"type {t.value} has {len(candidates)} questions, quota is {quota}",
                qtype=t,
            )
        selected.extend(rng.sample(candidates, quota))
    rng.shuffle(selected)
    return selected


def draw_revalidation(
    bank: QuestionBank,
    qtype: QuestionType,
    exclude: set[str],
    rng: random.Random,
) -> Question:
    """Draw a fresh question of ``qtype`` whose id is not in ``exclude``."""
    candidates = [q for q in sorted(bank.by_type.get(qtype, ()), key=lambda q: q.id)
                  if q.id not in exclude]
    if not candidates:
        raise QuestionExhaustedError(f"no unused {qtype.value} question remains")
    return rng.choice(candidates)


def build_placeholder_bank(per_type: int = 200) -> QuestionBank:
    """Generate the synthetic placeholder bank shipped with the package.

    Real question content is proprietary; these items only exercise the
    machinery (6 types x ``per_type`` items, 1,200 by default).
    """
    templates = [
        "Would you accept situation {n} if the outcome were uncertain?",
        "In scenario {n}, would you act before consulting anyone?",
        "Would you volunteer first in situation {n}?",
        "Faced with dilemma {n}, would you keep your usual routine?",
        "Would you lend your support in case {n} without guarantees?",
        "In setting {n}, would you try the unfamiliar option?",
        "Would you double-check everything before committing in case {n}?",
        "Would you share your plans openly in scenario {n}?",
        "Would you take the shortcut in situation {n}?",
        "Would you wait for more information before deciding in case {n}?",
    ]
    code = {
        QuestionType.HA_NS: "HANS",
        QuestionType.RD_HA: "RDHA",
        QuestionType.NS_RD: "NSRD",
        QuestionType.NS_HA: "NSHA",
        QuestionType.HA_RD: "HARD",
        QuestionType.RD_NS: "RDNS",
    }
    questions = []
    for t in TYPE_ORDER:
        for i in range(per_type):
            text = templates[i % len(templates)].format(n=i + 1)
            questions.append(Question(id=f"{code[t]}{i + 1:04d}", text=text, qtype=t))
    return QuestionBank(questions)


def load_default_bank() -> QuestionBank:
    """Load the 1,200-item placeholder bank packaged with the library."""
    from importlib import resources

    ref = resources.files("riskprofiler").joinpath("data/bank_1200.txt")
    with ref.open("rb") as fh:
        return load_bank(fh, fmt="lines")
