"""Hashing, signatures and the sign-then-hash VRF.

Two signature schemes share one interface. ``ed25519`` is a real public-key
scheme. ``sim`` is an ideal-signature stand-in for large simulations: the
signature is an HMAC under the secret key and verification looks the secret
up in a process-local registry filled at key creation. Both are deterministic,
which the VRF relies on.

Public keys carry their scheme in the first byte, so ``verify`` needs no
out-of-band context.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

DIGEST_SIZE = 32
PK_SIZE = 33

_ED25519 = 0x01
_SIM = 0x02
SCHEMES = {"ed25519": _ED25519, "sim": _SIM}

_sim_registry: dict[bytes, bytes] = {}


class Tag:
    """Domain-separation prefixes, one per signed or hashed payload type."""

    INTENT = b"rrr/intent/v1"
    CONFIRM = b"rrr/confirm/v1"
    BLOCK = b"rrr/block/v1"
    BLOCK_SIG = b"rrr/block-sig/v1"
    ENROLL_MINED = b"rrr/enroll-mined/v1"
    ENROLL_ATTESTED = b"rrr/enroll-attested/v1"
    QUOTE = b"rrr/ias-quote/v1"
    USERDATA = b"rrr/userdata/v1"
    PSEUDONYM = b"rrr/pseudonym/v1"
    VRF = b"rrr/vrf/v1"
    VRF_OUT = b"rrr/vrf-out/v1"
    SAMPLE = b"rrr/endorser-sample/v1"
    GENESIS = b"rrr/genesis/v1"
    GENESIS_PROOF = b"rrr/genesis-proof/v1"
    POW = b"rrr/pow/v1"
    TX = b"rrr/txs/v1"
    PK = b"rrr/pk/v1"


def hash_bytes(payload: bytes) -> bytes:
    return hashlib.sha256(payload).digest()


def hash_parts(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


@dataclass(frozen=True)
class KeyPair:
    sk: bytes
    pk: bytes

    @classmethod
    def from_seed(cls, seed: bytes, scheme: str = "ed25519") -> "KeyPair":
        """Derive a key pair deterministically from 32 seed bytes."""
        if len(seed) != 32:
            raise ValueError("key seed must be 32 bytes")
        kind = SCHEMES[scheme]
        if kind == _ED25519:
            priv = Ed25519PrivateKey.from_private_bytes(seed)
            raw = priv.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
            return cls(sk=bytes((_ED25519,)) + seed, pk=bytes((_ED25519,)) + raw)
        pk = bytes((_SIM,)) + hash_parts(b"rrr/sim-pk", seed)
        _sim_registry[pk] = seed
        return cls(sk=bytes((_SIM,)) + seed, pk=pk)

    @classmethod
    def generate(cls, rng, scheme: str = "ed25519") -> "KeyPair":
        """``rng`` is anything with ``randbytes`` (``random.Random``) or ``bytes``."""
        seed = rng.randbytes(32) if hasattr(rng, "randbytes") else rng.bytes(32)
        return cls.from_seed(seed, scheme)

    @property
    def scheme(self) -> str:
        return "ed25519" if self.pk[0] == _ED25519 else "sim"


def sign(key: KeyPair, message: bytes) -> bytes:
    kind, seed = key.sk[0], key.sk[1:]
    if kind == _ED25519:
        return Ed25519PrivateKey.from_private_bytes(seed).sign(message)
    if kind == _SIM:
        return hmac.new(seed, message, hashlib.sha256).digest()
    raise ValueError("unknown key scheme")


def verify(pk: bytes, message: bytes, signature: bytes) -> bool:
    if len(pk) != PK_SIZE:
        return False
    kind = pk[0]
    if kind == _ED25519:
        if len(signature) != 64:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(pk[1:]).verify(signature, message)
        except (InvalidSignature, ValueError):
            return False
        return True
    if kind == _SIM:
        seed = _sim_registry.get(pk)
        if seed is None or len(signature) != 32:
            return False
        return hmac.compare_digest(hmac.new(seed, message, hashlib.sha256).digest(), signature)
    return False


def sim_secret(pk: bytes) -> bytes | None:
    """Secret behind a ``sim`` public key, if this process created or imported it."""
    return _sim_registry.get(pk)


def import_sim_secret(seed: bytes) -> bytes:
    """Make a ``sim`` key verifiable in this process; returns its public key."""
    return KeyPair.from_seed(seed, "sim").pk


def pk_hash(pk: bytes) -> bytes:
    return hash_parts(Tag.PK, pk)


@dataclass(frozen=True)
class SeedUpdate:
    seed: bytes
    proof: bytes


def vrf_evaluate(key: KeyPair, prev_seed: bytes) -> SeedUpdate:
    if len(prev_seed) != DIGEST_SIZE:
        raise ValueError("previous seed must be 32 bytes")
    proof = sign(key, Tag.VRF + prev_seed)
    return SeedUpdate(seed=hash_parts(Tag.VRF_OUT, proof), proof=proof)


def vrf_verify(pk: bytes, prev_seed: bytes, seed: bytes, proof: bytes) -> bool:
    if len(prev_seed) != DIGEST_SIZE or len(seed) != DIGEST_SIZE:
        return False
    if hash_parts(Tag.VRF_OUT, proof) != seed:
        return False
    return verify(pk, Tag.VRF + prev_seed, proof)
