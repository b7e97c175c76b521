from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from riskprofiler.bank import load_default_bank
from riskprofiler.errors import PayloadVerificationError
from riskprofiler.events import read_events, replay
from riskprofiler.scoring import LatencyModel, LeadershipInputs, compute_result, result_to_json
from riskprofiler.service import Settings, create_app
from riskprofiler.signing import verify_payload

GOOD_EMOTION = {"valence": 0.3, "arousal": 0.1, "confidence": 0.92}


@pytest.fixture
def service(tmp_path):
    app = create_app(Settings(data_dir=tmp_path))
    with TestClient(app) as client:
        yield client, tmp_path, app


def register(client, username="alice", education=4, job=3) -> dict:
    r = client.post(
        "/v1/users",
        json={"username": username, "education_level": education, "job_level": job},
    )
    assert r.status_code == 201, r.text
    return r.json()


def auth(user: dict) -> dict:
    return {"Authorization": f"Bearer {user['token']}"}


def start(client, user: dict, nonce="n-1") -> str:
    r = client.post(
        "/v1/sessions", json={"username": user["username"], "nonce": nonce},
        headers=auth(user),
    )
    assert r.status_code == 201, r.text
    return r.json()["session_id"]


def answer_n(client, user, sid, n, latency=2800, emotion=GOOD_EMOTION, start_t=0):
    t = start_t
    last = None
    for _ in range(n):
        last = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": t, "answered_at": t + latency,
                  "emotion": emotion},
        )
        assert last.status_code == 200, last.text
        t += latency
    return last


class TestAccounts:
    def test_duplicate_username_conflicts(self, service):
        client, _, _ = service
        register(client, "bob")
        r = client.post(
            "/v1/users", json={"username": "bob", "education_level": 1, "job_level": 1}
        )
        assert r.status_code == 409
        assert r.json()["code"] == "duplicate_username"

    def test_level_validation(self, service):
        client, _, _ = service
        r = client.post(
            "/v1/users", json={"username": "x", "education_level": 9, "job_level": 1}
        )
        assert r.status_code == 422

    def test_auth_required(self, service):
        client, _, _ = service
        r = client.post("/v1/sessions", json={"username": "ghost"})
        assert r.status_code == 401


class TestSessionFlow:
    def test_full_scripted_flow_matches_engine_oracle(self, service):
        client, tmp, _ = service
        user = register(client)
        sid = start(client, user)

        r = client.get(f"/v1/sessions/{sid}/question", headers=auth(user))
        assert r.status_code == 200
        assert r.json()["total_questions"] == 30
        assert r.json()["revalidations_remaining"] == 6

        last = answer_n(client, user, sid, 30)
        assert last.json()["state"] == "Completed"
        assert last.json()["completed"] is True

        result = client.get(f"/v1/sessions/{sid}/result", headers=auth(user))
        assert result.status_code == 200

        # independent oracle: replay the persisted log through the engine
        log = tmp / "sessions" / f"{sid}.jsonl"
        session = replay(read_events(log), load_default_bank())
        bundle = compute_result(
            session, LeadershipInputs(4, 3), LatencyModel()
        )
        assert result.json() == json.loads(result_to_json(bundle))

    def test_same_nonce_same_questionnaire(self, service):
        client, _, _ = service
        a = register(client, "u1")
        b = register(client, "u2")
        sid_a = start(client, a, nonce="shared")
        sid_b1 = start(client, b, nonce="shared")
        sid_b2 = start(client, b, nonce="other")
        qa = client.get(f"/v1/sessions/{sid_a}/question", headers=auth(a)).json()
        qb1 = client.get(f"/v1/sessions/{sid_b1}/question", headers=auth(b)).json()
        qb2 = client.get(f"/v1/sessions/{sid_b2}/question", headers=auth(b)).json()
        # seed = hash(username, nonce): same user+nonce reproduces, users differ
        assert qb1["question_id"] != qa["question_id"] or qb1 != qa
        assert qb2["question_id"] != qb1["question_id"] or qb2 != qb1

    def test_answer_on_completed_conflicts(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        answer_n(client, user, sid, 30)
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "No", "displayed_at": 0, "answered_at": 900,
                  "emotion": GOOD_EMOTION},
        )
        assert r.status_code == 409
        assert r.json()["code"] == "wrong_state"

    def test_result_before_completion_conflicts(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        r = client.get(f"/v1/sessions/{sid}/result", headers=auth(user))
        assert r.status_code == 409

    def test_unknown_session_404(self, service):
        client, _, _ = service
        user = register(client)
        assert client.get("/v1/sessions/zzz/question", headers=auth(user)).status_code == 404

    def test_foreign_session_hidden(self, service):
        client, _, _ = service
        owner = register(client, "owner")
        thief = register(client, "thief")
        sid = start(client, owner)
        r = client.get(f"/v1/sessions/{sid}/question", headers=auth(thief))
        assert r.status_code == 404

    def test_clock_error_422(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": 100, "answered_at": 50,
                  "emotion": GOOD_EMOTION},
        )
        assert r.status_code == 422
        assert r.json()["code"] == "clock_error"

    def test_emotion_validation_422(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": 0, "answered_at": 900,
                  "emotion": {"valence": 3.0, "arousal": 0.0, "confidence": 0.5}},
        )
        assert r.status_code == 422

    def test_skip_decrements_budget_and_invalidates_on_seventh(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        for i in range(6):
            r = client.post(f"/v1/sessions/{sid}/skip", headers=auth(user))
            assert r.status_code == 200
            assert r.json()["revalidations_remaining"] == 5 - i
            assert r.json()["replacement_question_id"]
        r = client.post(f"/v1/sessions/{sid}/skip", headers=auth(user))
        assert r.json()["state"] == "Invalid"
        r = client.get(f"/v1/sessions/{sid}/question", headers=auth(user))
        assert r.status_code == 409

    def test_timeline_ingestion(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        timeline = [
            {"t_ms": 0, "valence": 0.2, "arousal": 0.4, "confidence": 1.0},
            {"t_ms": 400, "valence": 0.4, "arousal": 0.0, "confidence": 0.5},
        ]
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": 0, "answered_at": 2000,
                  "emotion_timeline": timeline},
        )
        assert r.status_code == 200
        assert r.json()["flagged"] is False  # mean confidence 0.75 qualifies

    def test_emotion_or_timeline_exactly_one(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": 0, "answered_at": 2000},
        )
        assert r.status_code == 422

    def test_disqualified_emotion_extends_session(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        r = client.post(
            f"/v1/sessions/{sid}/answer", headers=auth(user),
            json={"answer": "Yes", "displayed_at": 0, "answered_at": 2000,
                  "emotion": {"valence": 0.0, "arousal": 0.0, "confidence": 0.2}},
        )
        body = r.json()
        assert body["flagged"] is True
        assert body["total_questions"] == 31
        assert body["appended_question_id"]
        answer_n(client, user, sid, 30, start_t=10_000)
        result = client.get(f"/v1/sessions/{sid}/result", headers=auth(user))
        assert result.json()["truthfulness"] == round(30 / 31, 4)


class TestConcurrency:
    def test_parallel_answers_never_interleave(self, service):
        client, _, app = service
        user = register(client)
        sid = start(client, user)
        errors = []

        def worker(offset):
            for k in range(5):
                t = offset * 100_000 + k * 3000
                r = client.post(
                    f"/v1/sessions/{sid}/answer", headers=auth(user),
                    json={"answer": "Yes", "displayed_at": t, "answered_at": t + 2500,
                          "emotion": GOOD_EMOTION},
                )
                if r.status_code != 200:
                    errors.append(r.text)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        session = app.state.sessions.get(sid).session
        assert len(session.records) == 20
        assert session.cursor == 20


class TestQrPayload:
    def complete(self, client):
        user = register(client)
        sid = start(client, user)
        answer_n(client, user, sid, 30)
        return user, sid

    def test_payload_roundtrips_to_result(self, service):
        client, tmp, _ = service
        user, sid = self.complete(client)
        text = client.get(f"/v1/sessions/{sid}/qr", headers=auth(user)).text
        key = bytes.fromhex((tmp / "signing.key").read_text().strip())
        result = verify_payload(text, key)
        api_result = client.get(f"/v1/sessions/{sid}/result", headers=auth(user)).json()
        assert result == api_result

    def test_single_byte_tamper_detected(self, service):
        client, tmp, _ = service
        user, sid = self.complete(client)
        text = client.get(f"/v1/sessions/{sid}/qr", headers=auth(user)).text
        key = bytes.fromhex((tmp / "signing.key").read_text().strip())
        mutated = ("B" if text[10] != "B" else "C").join([text[:10], text[11:]])
        with pytest.raises(PayloadVerificationError):
            verify_payload(mutated, key)

    def test_qr_requires_completion(self, service):
        client, _, _ = service
        user = register(client)
        sid = start(client, user)
        assert client.get(f"/v1/sessions/{sid}/qr", headers=auth(user)).status_code == 409


class TestCrashRecovery:
    def test_restart_restores_sessions(self, service, tmp_path):
        client, tmp, _ = service
        user = register(client)
        sid = start(client, user)
        answer_n(client, user, sid, 12)
        client.post(f"/v1/sessions/{sid}/skip", headers=auth(user))

        # a fresh app over the same data directory picks up where we stopped
        revived = create_app(Settings(data_dir=tmp))
        with TestClient(revived) as client2:
            r = client2.get(f"/v1/sessions/{sid}/question", headers=auth(user))
            assert r.status_code == 200
            assert r.json()["answered"] == 12
            assert r.json()["revalidations_used"] == 1

    def test_completed_result_identical_after_restart(self, service):
        client, tmp, _ = service
        user = register(client)
        sid = start(client, user)
        answer_n(client, user, sid, 30)
        live = client.get(f"/v1/sessions/{sid}/result", headers=auth(user)).json()

        revived = create_app(Settings(data_dir=tmp))
        with TestClient(revived) as client2:
            replayed = client2.get(f"/v1/sessions/{sid}/result", headers=auth(user)).json()
        assert replayed == live


class TestStatic:
    def test_static_dir_served_when_present(self, tmp_path):
        static = tmp_path / "static"
        static.mkdir()
        (static / "index.html").write_text("<html><body>assessment</body></html>")
        app = create_app(Settings(data_dir=tmp_path / "data", static_dir=static))
        with TestClient(app) as client:
            r = client.get("/")
            assert r.status_code == 200
            assert "assessment" in r.text
            assert client.get("/v1/health").status_code == 200
