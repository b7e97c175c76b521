"""File-backed persistence: account index plus per-session event logs.

Sessions are event-sourced. Every state transition appends JSON lines to
``<data_dir>/sessions/<id>.jsonl`` before the caller responds; replaying a
log through the engine reconstructs the session exactly, which is also how
the store recovers after a restart.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..bank import QuestionBank
from ..errors import EventLogError
from ..events import append_events, read_events, replay, start_event
from ..session import Session, SessionConfig, start_session


class UnknownUserError(KeyError):
    pass


class DuplicateUserError(ValueError):
    pass


class UnknownSessionError(KeyError):
    pass


@dataclass
class Account:
    username: str
    token: str
    created_at_ms: int
    education_level: int
    job_level: int


class AccountStore:
    """Username-keyed account index persisted as one JSON document."""

    def __init__(self, data_dir: Path):
        self.path = data_dir / "accounts.json"
        self._lock = threading.Lock()
        self._accounts: dict[str, Account] = {}
        if self.path.exists():
            raw = json.loads(self.path.read_text(encoding="utf-8"))
            for username, doc in raw.items():
                self._accounts[username] = Account(username=username, **doc)

    def _persist(self) -> None:
        doc = {
            a.username: {
                "token": a.token,
                "created_at_ms": a.created_at_ms,
                "education_level": a.education_level,
                "job_level": a.job_level,
            }
            for a in self._accounts.values()
        }
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
        tmp.replace(self.path)

    def create(self, username: str, education_level: int, job_level: int) -> Account:
        with self._lock:
            if username in self._accounts:
                raise DuplicateUserError(username)
            account = Account(
                username=username,
                token=secrets.token_urlsafe(24),
                created_at_ms=int(time.time() * 1000),
                education_level=education_level,
                job_level=job_level,
            )
            self._accounts[username] = account
            self._persist()
            return account

    def get(self, username: str) -> Account:
        try:
            return self._accounts[username]
        except KeyError:
            raise UnknownUserError(username) from None

    def by_token(self, token: str) -> Account:
        for account in self._accounts.values():
            if secrets.compare_digest(account.token, token):
                return account
        raise UnknownUserError("no account for token")


@dataclass
class SessionEntry:
    session: Session
    lock: threading.Lock
    log_path: Path


class SessionStore:
    """In-memory session registry backed by append-only event logs."""

    def __init__(self, data_dir: Path, bank: QuestionBank, config: SessionConfig | None = None):
        self.bank = bank
        self.config = config or SessionConfig()
        self.sessions_dir = data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._entries: dict[str, SessionEntry] = {}
        self._lock = threading.Lock()
        self._recover()

    def _recover(self) -> None:
        for log_path in sorted(self.sessions_dir.glob("*.jsonl")):
            try:
                session = replay(read_events(log_path), self.bank)
            except EventLogError:
                # a torn log must not block startup; leave the file for inspection
                continue
            self._entries[session.session_id] = SessionEntry(
                session=session, lock=threading.Lock(), log_path=log_path
            )

    def create(self, username: str, seed: int) -> Session:
        session = start_session(username, self.bank, seed, config=self.config)
        entry = SessionEntry(
            session=session,
            lock=threading.Lock(),
            log_path=self.sessions_dir / f"{session.session_id}.jsonl",
        )
        append_events(entry.log_path, [start_event(session)])
        with self._lock:
            self._entries[session.session_id] = entry
        return session

    def get(self, session_id: str) -> SessionEntry:
        try:
            return self._entries[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def append(self, entry: SessionEntry, events: list[dict]) -> None:
        append_events(entry.log_path, events)
