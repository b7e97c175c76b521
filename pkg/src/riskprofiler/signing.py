"""Authenticated result payloads, compact enough to render as a QR code.

A payload is the canonical JSON of {issued_at, key_id, result, signature}
encoded as unpadded base64url. The signature is HMAC-SHA256 over the
canonical JSON of the other three fields. Decoding enforces canonical
re-encoding, so flipping any single byte of the text breaks verification
(either the decode, the canonical check, or the MAC).
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import json
import secrets
from dataclasses import dataclass
from pathlib import Path

from .errors import PayloadVerificationError


def canonical_json(obj: object) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass(frozen=True)
class SignedResultPayload:
    result: dict
    issued_at: int  # unix epoch milliseconds
    key_id: str
    signature: str  # hex HMAC-SHA256


def _mac(result: dict, issued_at: int, key_id: str, key: bytes) -> str:
    message = canonical_json({"issued_at": issued_at, "key_id": key_id, "result": result})
    return hmac.new(key, message, hashlib.sha256).hexdigest()


def sign_result(result: dict, key: bytes, key_id: str, issued_at: int) -> SignedResultPayload:
    return SignedResultPayload(
        result=result,
        issued_at=issued_at,
        key_id=key_id,
        signature=_mac(result, issued_at, key_id, key),
    )


def encode_payload(payload: SignedResultPayload) -> str:
    """Compact base64url text (unpadded) of the canonical payload JSON."""
    doc = {
        "issued_at": payload.issued_at,
        "key_id": payload.key_id,
        "result": payload.result,
        "signature": payload.signature,
    }
    return base64.urlsafe_b64encode(canonical_json(doc)).rstrip(b"=").decode("ascii")


def decode_payload(text: str) -> SignedResultPayload:
    """Decode without verifying; rejects non-canonical encodings."""
    padded = text + "=" * (-len(text) % 4)
    try:
        raw = base64.urlsafe_b64decode(padded.encode("ascii"))
    except (binascii.Error, ValueError, UnicodeEncodeError) as exc:
        raise PayloadVerificationError(f"payload is not valid base64url: {exc}") from None
    if base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii") != text:
        raise PayloadVerificationError("payload encoding is not canonical")
    try:
        doc = json.loads(raw.decode("utf-8"))
        return SignedResultPayload(
            result=doc["result"],
            issued_at=doc["issued_at"],
            key_id=doc["key_id"],
            signature=doc["signature"],
        )
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError) as exc:
        raise PayloadVerificationError(f"payload structure invalid: {exc}") from None


def verify_payload(text: str, key: bytes) -> dict:
    """Decode and authenticate; returns the embedded result dict."""
    payload = decode_payload(text)
    expected = _mac(payload.result, payload.issued_at, payload.key_id, key)
    if not hmac.compare_digest(expected, str(payload.signature)):
        raise PayloadVerificationError("signature mismatch")
    return payload.result


def load_or_create_key(path: Path | str) -> tuple[bytes, str]:
    """Read the hex signing key at ``path``, creating one if absent.

    Returns (key bytes, key id); the id is the first 8 hex chars of the
    key's SHA-256.
    """
    path = Path(path)
    if path.exists():
        key = bytes.fromhex(path.read_text(encoding="utf-8").strip())
    else:
        key = secrets.token_bytes(32)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(key.hex() + "\n", encoding="utf-8")
    key_id = hashlib.sha256(key).hexdigest()[:8]
    return key, key_id
