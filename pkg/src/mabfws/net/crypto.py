"""Opaque tokens standing for an agent's private part of a state."""

from __future__ import annotations

import hashlib
import json
from typing import Iterable

TOKEN_BYTES = 16


def derive_key(seed: int, agent: int) -> bytes:
    """Per-run secret of one agent, derived from the run seed."""
    return hashlib.sha256(f"mabfws-agent-key:{seed}:{agent}".encode()).digest()


def encrypt_private_part(private_fact_names: Iterable[str], key: bytes) -> str:
    """Keyed one-way digest of the sorted private fact names.

    Equal private parts map to equal tokens under the same key; the token has
    a fixed length and there is no way back other than the owner's own table.
    """
    encoding = json.dumps(sorted(private_fact_names), separators=(",", ":")).encode("utf-8")
    return hashlib.blake2b(encoding, key=key[:64], digest_size=TOKEN_BYTES).hexdigest()
