"""Acceptance suite: one test per release criterion, stated tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion. Budgets are asserted on the core computation, with setup
(bank loading, session scripting) kept outside the timer.
"""

from __future__ import annotations

import time
from collections import Counter

import numpy as np
import pytest
from fastapi.testclient import TestClient

from riskprofiler.bank import (
    Dimension,
    QuestionType,
    SELECTION_QUOTA,
    TYPE_ORDER,
    load_default_bank,
    select_questionnaire,
)
from riskprofiler.cohort import generate_cohort
from riskprofiler.errors import PayloadVerificationError
from riskprofiler.events import read_events
from riskprofiler.mlp import (
    Mlp,
    TrainConfig,
    default_network,
    evaluate,
    forward,
    gradients,
    train,
)
from riskprofiler.scoring import (
    LatencyBand,
    TIE_ORDER,
    risk_profile,
    thinking_type,
    truthfulness,
    worthiness_pct,
    worthiness_raw,
)
from riskprofiler.service import Settings, create_app
from riskprofiler.service.store import SessionStore
from riskprofiler.session import (
    AnswerRecord,
    AnswerValue,
    EmotionSample,
    SessionConfig,
    SessionState,
    granted_dimension,
    skip_question,
    start_session,
    submit_answer,
)
from riskprofiler.signing import verify_payload

from .conftest import answer_all, emotion


def report(number: int, elapsed_s: float, detail: str) -> None:
    print(f"[PASS] criterion {number:2d} ({elapsed_s * 1000:.1f} ms): {detail}")


def test_c01_worthiness_maximum():
    t0 = time.perf_counter()
    raw = worthiness_raw(6, 1.0, 5, 4, 1.0)
    pct = worthiness_pct(raw)
    elapsed = time.perf_counter() - t0
    assert raw == 120.0
    assert pct == 1.0
    assert elapsed < 0.001
    report(1, elapsed, "worthiness maximum 120 exactly, normalized to 100%")


def test_c02_truthfulness_endpoints():
    t0 = time.perf_counter()
    values = [truthfulness(r) for r in range(7)]
    elapsed = time.perf_counter() - t0
    assert values[0] == 1.0
    assert abs(values[6] - 0.8333) <= 0.0001  # +/- 0.01 percentage points
    assert all(a > b for a, b in zip(values, values[1:]))
    assert elapsed < 0.001
    report(2, elapsed, "truthfulness spans 100% down to 83.33%, strictly decreasing")


def test_c03_thinking_type_grid():
    expected = {
        1000: (LatencyBand.XS, 1), 2000: (LatencyBand.S, 2), 3000: (LatencyBand.M, 3),
        4000: (LatencyBand.L, 4), 5000: (LatencyBand.XL, 5),
    }
    boundaries = {1500: LatencyBand.S, 2500: LatencyBand.M,
                  3500: LatencyBand.L, 4500: LatencyBand.XL}
    thinking_type(3000)  # warm-up outside the timed block
    t0 = time.perf_counter()
    for latency, (band, coeff) in expected.items():
        tt = thinking_type(latency)
        assert (tt.band, tt.coefficient) == (band, coeff)
    for edge, band in boundaries.items():
        assert thinking_type(edge).band is band           # closed below
        assert thinking_type(edge - 0.001).band is not band  # open above
    clamped = thinking_type(8000)
    elapsed = time.perf_counter() - t0
    assert clamped.band is LatencyBand.XL
    assert clamped.unusual is True
    assert elapsed < 0.001
    report(3, elapsed, "latency grid XS..XL with half-open edges and XL clamp")


def test_c04_selection_contract_over_1000_seeds():
    bank = load_default_bank()
    quota = Counter(SELECTION_QUOTA)
    t0 = time.perf_counter()
    for seed in range(1000):
        picked = select_questionnaire(bank, seed)
        assert len(picked) == 30
        assert len({q.id for q in picked}) == 30
        assert Counter(q.qtype for q in picked) == quota
        firsts = Counter(q.qtype.first for q in picked)
        assert firsts == {Dimension.HA: 10, Dimension.NS: 10, Dimension.RD: 10}
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    report(4, elapsed, "1000 seeds: 30 distinct, quotas 6/6/6/4/4/4, leads 10/10/10")


def test_c05_answer_to_dimension_rule():
    t0 = time.perf_counter()
    observed = {
        (qtype, answer): granted_dimension(qtype, answer)
        for qtype in QuestionType
        for answer in AnswerValue
    }
    elapsed = time.perf_counter() - t0
    assert len(observed) == 12
    for (qtype, answer), dim in observed.items():
        assert dim is (qtype.first if answer is AnswerValue.YES else qtype.second)
    assert observed[(QuestionType.HA_NS, AnswerValue.YES)] is Dimension.HA
    assert observed[(QuestionType.RD_HA, AnswerValue.NO)] is Dimension.HA
    assert elapsed < 0.001
    report(5, elapsed, "all 12 (type, answer) pairs grant the mandated dimension")


def test_c06_revalidation_semantics():
    bank = load_default_bank()
    t0 = time.perf_counter()

    budget = start_session("a", bank, seed=1)
    for _ in range(6):
        skip_question(budget)
    assert budget.state is SessionState.ACTIVE
    assert truthfulness(budget.revalidations) == pytest.approx(0.8333, abs=0.0001)
    skip_question(budget)
    assert budget.state is SessionState.INVALID

    extended = start_session("b", bank, seed=2)
    submit_answer(extended, AnswerValue.YES, 0, 2500, emotion(confidence=0.2))
    answer_all(extended)
    elapsed = time.perf_counter() - t0
    assert extended.state is SessionState.COMPLETED
    assert len(extended.records) == 31  # 30 standard plus 1 revalidation
    assert elapsed < 0.010
    report(6, elapsed, "6 revalidations stay valid at 83.33%, 7th invalidates, 31-record completion")


def test_c07_scoring_oracle_equivalence():
    qtypes = [
        QuestionType.HA_NS, QuestionType.RD_HA, QuestionType.NS_RD,
        QuestionType.NS_HA, QuestionType.HA_RD, QuestionType.RD_NS,
        QuestionType.HA_NS, QuestionType.RD_HA,
    ]
    sample = emotion()
    t0 = time.perf_counter()
    for pattern in range(256):
        answers = [AnswerValue.YES if (pattern >> i) & 1 else AnswerValue.NO
                   for i in range(8)]
        # independent brute-force tally of granted dimensions
        brute = Counter(q.first if a is AnswerValue.YES else q.second
                        for q, a in zip(qtypes, answers))
        records = [
            AnswerRecord(
                question_id=f"m{i}", qtype=q, answer=a, latency_ms=1000,
                emotion=sample,
                granted=q.first if a is AnswerValue.YES else q.second,
            )
            for i, (q, a) in enumerate(zip(qtypes, answers))
        ]
        rp = risk_profile(records)
        assert rp.bin_counts == {d: brute.get(d, 0) for d in Dimension}
        ranked = sorted(Dimension, key=lambda d: (-brute.get(d, 0), TIE_ORDER.index(d)))
        assert (rp.primary, rp.secondary) == (ranked[0], ranked[1])
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(7, elapsed, "all 256 mini-session patterns match the brute-force tally")


def test_c08_gradient_check_20_nets():
    rng = np.random.default_rng(98)
    t0 = time.perf_counter()
    worst = 0.0
    for trial in range(20):
        net = Mlp.create([9, 5, 3], activation="sigmoid", seed=trial)
        x = rng.uniform(-1, 1, 9)
        t = np.zeros(3)
        t[trial % 3] = 1.0
        dws, dbs = gradients(net, x, t)

        def loss() -> float:
            _, y = forward(net, x)
            return 0.5 * float(np.sum((y - t) ** 2))

        eps = 1e-4
        params = [(net.weights[l], dws[l]) for l in range(len(net.weights))]
        params += [(net.biases[l], dbs[l]) for l in range(len(net.biases))]
        for array, grad in params:
            for idx in np.ndindex(array.shape):
                orig = array[idx]
                array[idx] = orig + eps
                lp = loss()
                array[idx] = orig - eps
                lm = loss()
                array[idx] = orig
                numeric = (lp - lm) / (2 * eps)
                denom = max(1e-12, abs(numeric) + abs(grad[idx]))
                worst = max(worst, abs(numeric - grad[idx]) / denom)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-4
    assert elapsed < 5.0
    report(8, elapsed, f"delta-rule gradients match finite differences (max rel {worst:.2e})")


def test_c09_training_reproduction():
    seed = 20260809
    t0 = time.perf_counter()
    cohort = generate_cohort(2000, noise=0.1, seed=seed)
    net = default_network(seed=seed)
    cfg = TrainConfig(seed=seed)
    assert cfg.split == (0.70, 0.15, 0.15)
    rep = train(net, cohort.dataset, cfg)
    metrics = evaluate(net, cohort.dataset.features[rep.test_indices],
                       cohort.dataset.labels[rep.test_indices])
    elapsed = time.perf_counter() - t0

    # independent ceiling: decode granted-dimension counts from raw features
    def feature_oracle(row: np.ndarray) -> Dimension:
        counts: Counter = Counter()
        for q in range(30):
            block = row[q * 9:(q + 1) * 9]
            qtype = TYPE_ORDER[int(np.argmax(block[:6]))]
            answer = AnswerValue.YES if block[6] > 0 else AnswerValue.NO
            counts[granted_dimension(qtype, answer)] += 1
        return min(Dimension, key=lambda d: (-counts.get(d, 0), TIE_ORDER.index(d)))

    test_rows = cohort.dataset.features[rep.test_indices]
    test_dims = [cohort.labels[i] for i in rep.test_indices]
    oracle_hits = sum(feature_oracle(row) is dim for row, dim in zip(test_rows, test_dims))
    oracle_accuracy = oracle_hits / len(test_rows)

    final_val = min(rep.val_mse)
    assert metrics.accuracy >= 0.90
    assert final_val < 0.25 * rep.val_mse[0]
    assert elapsed < 60.0
    report(
        9, elapsed,
        f"test accuracy {metrics.accuracy:.4f} (bin-count ceiling {oracle_accuracy:.4f}), "
        f"val MSE {final_val:.4f} vs epoch-1 {rep.val_mse[0]:.4f} "
        f"({final_val / rep.val_mse[0]:.1%}), {rep.epochs_run} epochs ({rep.stop_reason})",
    )


def snapshot(session) -> tuple:
    return (
        session.session_id, session.username, session.seed,
        session.state, session.cursor, session.revalidations,
        tuple(q.id for q in session.questionnaire),
        tuple((r.question_id, r.answer, r.latency_ms, r.flagged, r.granted,
               r.emotion.valence, r.emotion.arousal, r.emotion.confidence)
              for r in session.records),
    )


def test_c10_crash_replay(tmp_path):
    from riskprofiler.scoring import LeadershipInputs, compute_result, result_to_json

    bank = load_default_bank()
    app = create_app(Settings(data_dir=tmp_path / "live"))
    client = TestClient(app)
    user = client.post("/v1/users", json={
        "username": "replayer", "education_level": 4, "job_level": 5}).json()
    headers = {"Authorization": f"Bearer {user['token']}"}
    sid = client.post("/v1/sessions", json={"username": "replayer", "nonce": "fixed"},
                      headers=headers).json()["session_id"]
    log_path = tmp_path / "live" / "sessions" / f"{sid}.jsonl"
    store = app.state.sessions

    # live snapshots keyed by how many log lines existed after each operation
    line_snapshots: list[tuple[int, tuple]] = []

    def mark():
        lines = log_path.read_text().count("\n")
        line_snapshots.append((lines, snapshot(store.get(sid).session)))

    mark()
    clock = 0
    rng = np.random.default_rng(1)
    for i in range(30):
        latency = int(rng.integers(900, 4000))
        reply = client.post(f"/v1/sessions/{sid}/answer", headers=headers, json={
            "answer": "Yes" if i % 3 else "No",
            "displayed_at": clock, "answered_at": clock + latency,
            "emotion": {"valence": 0.25, "arousal": -0.1, "confidence": 0.93},
        })
        assert reply.status_code == 200
        clock += latency
        mark()

    live_session = store.get(sid).session
    assert live_session.state is SessionState.COMPLETED
    live_result = result_to_json(compute_result(
        live_session, LeadershipInputs(4, 5)))
    lines = log_path.read_text().splitlines()

    t0 = time.perf_counter()
    for k in range(1, len(lines) + 1):
        crash_dir = tmp_path / f"crash{k}" / "sessions"
        crash_dir.mkdir(parents=True)
        (crash_dir / f"{sid}.jsonl").write_text("\n".join(lines[:k]) + "\n")
        recovered = SessionStore(tmp_path / f"crash{k}", bank, SessionConfig())
        got = snapshot(recovered.get(sid).session)
        expected = next(snap for count, snap in line_snapshots if count >= k)
        assert got == expected
    replayed = SessionStore(tmp_path / f"crash{len(lines)}", bank, SessionConfig())
    replay_result = result_to_json(compute_result(
        replayed.get(sid).session, LeadershipInputs(4, 5)))
    elapsed = time.perf_counter() - t0
    assert replay_result == live_result  # byte-identical serialization
    assert elapsed < 10.0
    report(10, elapsed, f"{len(lines)} log prefixes replay to the live states; result byte-identical")


def test_c11_qr_payload_integrity(tmp_path):
    app = create_app(Settings(data_dir=tmp_path))
    client = TestClient(app)
    user = client.post("/v1/users", json={
        "username": "qr", "education_level": 3, "job_level": 3}).json()
    headers = {"Authorization": f"Bearer {user['token']}"}
    sid = client.post("/v1/sessions", json={"username": "qr", "nonce": "n"},
                      headers=headers).json()["session_id"]
    clock = 0
    for _ in range(30):
        client.post(f"/v1/sessions/{sid}/answer", headers=headers, json={
            "answer": "Yes", "displayed_at": clock, "answered_at": clock + 2600,
            "emotion": {"valence": 0.2, "arousal": 0.2, "confidence": 0.95},
        })
        clock += 2600
    text = client.get(f"/v1/sessions/{sid}/qr", headers=headers).text
    api_result = client.get(f"/v1/sessions/{sid}/result", headers=headers).json()
    key = bytes.fromhex((tmp_path / "signing.key").read_text().strip())

    t0 = time.perf_counter()
    assert verify_payload(text, key) == api_result  # unmodified round-trips exactly
    failures = 0
    for i in range(len(text)):
        substitute = "A" if text[i] != "A" else "B"
        mutated = text[:i] + substitute + text[i + 1:]
        try:
            verify_payload(mutated, key)
        except PayloadVerificationError:
            failures += 1
    elapsed = time.perf_counter() - t0
    assert failures == len(text)  # every single-byte mutation must fail
    assert elapsed < 1.0
    report(11, elapsed, f"all {len(text)} single-byte mutations rejected; payload round-trips")
