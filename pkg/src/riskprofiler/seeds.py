"""Stable seed derivation.

Built-in ``hash()`` is salted per process, so every seed that must reproduce
across runs (question selection, revalidation draws, simulated emotions) is
derived from SHA-256 instead.
"""

import hashlib


def derive_seed(*parts: object) -> int:
    """Collapse arbitrary labelled parts into a stable 64-bit seed."""
    message = "\x1f".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.sha256(message).digest()
    return int.from_bytes(digest[:8], "big")
