from __future__ import annotations

from dataclasses import dataclass

from ..core.crypto import Tag, hash_parts

MAX_TARGET = (1 << 256) - 1


@dataclass(frozen=True)
class InitCandidate:
    pk: bytes
    nonce: int
    attempts: int


def pow_value(pk: bytes, nonce: int) -> int:
    return int.from_bytes(hash_parts(Tag.POW, pk, nonce.to_bytes(8, "big")), "big")


def mine_initial_identity(target: int, pk: bytes, rng) -> InitCandidate:
    """Search nonces from a random start until ``hash(pk || nonce) < target``."""
    if not 0 < target <= MAX_TARGET:
        raise ValueError("target must be a positive 256-bit bound")
    start = rng.getrandbits(64)
    attempts = 0
    while True:
        nonce = (start + attempts) & 0xFFFF_FFFF_FFFF_FFFF
        attempts += 1
        if pow_value(pk, nonce) < target:
            return InitCandidate(pk, nonce, attempts)


def check_initial_identity(c: InitCandidate, target: int) -> bool:
    return pow_value(c.pk, c.nonce) < target
