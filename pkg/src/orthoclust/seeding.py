"""Deterministic derived seeds for per-item RNG streams.

Every stochastic step in the pipeline draws from its own stream whose seed
is derived from the master seed plus a stable item key, so results do not
depend on iteration order or parallel scheduling.
"""

import hashlib


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from the given parts (hashed, order-sensitive)."""
    key = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
