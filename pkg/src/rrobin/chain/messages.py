"""Wire and on-chain formats for intents, confirmations and blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from ..core.crypto import DIGEST_SIZE, KeyPair, Tag, hash_parts, pk_hash, sign
from ..core.encoding import DecodeError, Reader, Writer
from ..identity.messages import EnrollMsg, decode_enroll_from

MAX_PK = 64
MAX_SIG = 128
MAX_TX = 1 << 20


def tx_hash(txs) -> bytes:
    w = Writer().raw(Tag.TX).u32(len(txs))
    for t in txs:
        w.blob(t)
    return hash_parts(w.getvalue())


@dataclass(frozen=True)
class IntentMsg:
    chain_id: bytes
    candidate_pk: bytes
    round: int
    prev_hash: bytes
    tx_hash: bytes
    sig: bytes = b""

    def body(self) -> bytes:
        return (
            Writer()
            .raw(Tag.INTENT)
            .raw(self.chain_id)
            .blob(self.candidate_pk)
            .u64(self.round)
            .raw(self.prev_hash)
            .raw(self.tx_hash)
            .getvalue()
        )

    @classmethod
    def create(cls, key: KeyPair, chain_id: bytes, round_: int, prev_hash: bytes, txs_hash: bytes) -> "IntentMsg":
        unsigned = cls(chain_id, key.pk, round_, prev_hash, txs_hash)
        return cls(chain_id, key.pk, round_, prev_hash, txs_hash, sign(key, unsigned.body()))

    def encode_into(self, w: Writer) -> None:
        w.raw(self.chain_id).blob(self.candidate_pk).u64(self.round)
        w.raw(self.prev_hash).raw(self.tx_hash).blob(self.sig)

    @classmethod
    def decode_from(cls, r: Reader) -> "IntentMsg":
        return cls(
            r.fixed(DIGEST_SIZE),
            r.blob(MAX_PK),
            r.u64(),
            r.fixed(DIGEST_SIZE),
            r.fixed(DIGEST_SIZE),
            r.blob(MAX_SIG),
        )

    def encode(self) -> bytes:
        w = Writer()
        self.encode_into(w)
        return w.getvalue()

    @cached_property
    def intent_hash(self) -> bytes:
        return hash_parts(Tag.INTENT, self.encode())


@dataclass(frozen=True)
class ConfirmMsg:
    chain_id: bytes
    intent_hash: bytes
    leader_pk_hash: bytes
    endorser_pk_hash: bytes
    sig: bytes = b""

    def body(self) -> bytes:
        return b"".join(
            (Tag.CONFIRM, self.chain_id, self.intent_hash, self.leader_pk_hash, self.endorser_pk_hash)
        )

    @classmethod
    def create(cls, key: KeyPair, intent: IntentMsg) -> "ConfirmMsg":
        unsigned = cls(intent.chain_id, intent.intent_hash, pk_hash(intent.candidate_pk), pk_hash(key.pk))
        return cls(
            unsigned.chain_id,
            unsigned.intent_hash,
            unsigned.leader_pk_hash,
            unsigned.endorser_pk_hash,
            sign(key, unsigned.body()),
        )

    def encode_into(self, w: Writer) -> None:
        w.raw(self.chain_id).raw(self.intent_hash).raw(self.leader_pk_hash)
        w.raw(self.endorser_pk_hash).blob(self.sig)

    @classmethod
    def decode_from(cls, r: Reader) -> "ConfirmMsg":
        return cls(
            r.fixed(DIGEST_SIZE),
            r.fixed(DIGEST_SIZE),
            r.fixed(DIGEST_SIZE),
            r.fixed(DIGEST_SIZE),
            r.blob(MAX_SIG),
        )


@dataclass(frozen=True)
class Block:
    intent: IntentMsg
    confirms: tuple[ConfirmMsg, ...]
    txs: tuple[bytes, ...]
    enrolls: tuple[EnrollMsg, ...]
    seed: bytes
    proof: bytes
    sig: bytes = b""

    @property
    def round(self) -> int:
        return self.intent.round

    @property
    def prev_hash(self) -> bytes:
        return self.intent.prev_hash

    @property
    def leader_pk(self) -> bytes:
        return self.intent.candidate_pk

    def _encode_unsigned(self, w: Writer) -> None:
        self.intent.encode_into(w)
        w.u32(len(self.confirms))
        for c in self.confirms:
            c.encode_into(w)
        w.u32(len(self.txs))
        for t in self.txs:
            w.blob(t)
        w.u32(len(self.enrolls))
        for e in self.enrolls:
            e.encode_into(w)
        w.raw(self.seed).blob(self.proof)

    def signing_body(self) -> bytes:
        w = Writer().raw(Tag.BLOCK_SIG)
        self._encode_unsigned(w)
        return w.getvalue()

    @classmethod
    def create(cls, key: KeyPair, intent, confirms, txs, enrolls, seed, proof) -> "Block":
        unsigned = cls(intent, tuple(confirms), tuple(txs), tuple(enrolls), seed, proof)
        return cls(
            intent, unsigned.confirms, unsigned.txs, unsigned.enrolls, seed, proof, sign(key, unsigned.signing_body())
        )

    @cached_property
    def encoded(self) -> bytes:
        w = Writer()
        self._encode_unsigned(w)
        w.blob(self.sig)
        return w.getvalue()

    def encode(self) -> bytes:
        return self.encoded

    @cached_property
    def block_hash(self) -> bytes:
        return hash_parts(Tag.BLOCK, self.encoded)

    @classmethod
    def decode_from(cls, r: Reader) -> "Block":
        intent = IntentMsg.decode_from(r)
        confirms = tuple(ConfirmMsg.decode_from(r) for _ in range(r.count(1 << 16)))
        txs = tuple(r.blob(MAX_TX) for _ in range(r.count(1 << 20)))
        enrolls = tuple(decode_enroll_from(r) for _ in range(r.count(1 << 12)))
        seed = r.fixed(DIGEST_SIZE)
        proof = r.blob(MAX_SIG)
        sig = r.blob(MAX_SIG)
        return cls(intent, confirms, txs, enrolls, seed, proof, sig)

    @classmethod
    def decode(cls, data: bytes) -> "Block":
        r = Reader(data)
        b = cls.decode_from(r)
        r.done()
        return b


@dataclass(frozen=True)
class GenesisMember:
    pk: bytes
    pseudonym: bytes = b""


@dataclass(frozen=True)
class Genesis:
    """Round-0 root: initial identities, seed, enclave hash and parameters."""

    members: tuple[GenesisMember, ...]
    seed: bytes
    enclave_hash: bytes
    provider_pk: bytes
    params: "object"
    proof: bytes = field(default=b"")

    @staticmethod
    def stub_proof(seed: bytes, members) -> bytes:
        return hash_parts(Tag.GENESIS_PROOF, seed, *(m.pk for m in members))

    @classmethod
    def make(cls, members, seed: bytes, params, enclave_hash: bytes = bytes(32), provider_pk: bytes = b"") -> "Genesis":
        members = tuple(m if isinstance(m, GenesisMember) else GenesisMember(m) for m in members)
        if len(seed) != DIGEST_SIZE:
            raise ValueError("genesis seed must be 32 bytes")
        if len({m.pk for m in members}) != len(members):
            raise ValueError("duplicate genesis public key")
        return cls(members, seed, enclave_hash, provider_pk, params, cls.stub_proof(seed, members))

    def proof_ok(self) -> bool:
        return self.proof == self.stub_proof(self.seed, self.members)

    def encode(self) -> bytes:
        w = Writer().u32(len(self.members))
        for m in self.members:
            w.blob(m.pk).blob(m.pseudonym)
        w.raw(self.seed).raw(self.enclave_hash).blob(self.provider_pk).blob(self.proof)
        for v in self.params.to_dict().values():
            w.u64(v)
        return w.getvalue()

    @cached_property
    def chain_id(self) -> bytes:
        return hash_parts(Tag.GENESIS, self.encode())

    @property
    def block_hash(self) -> bytes:
        return self.chain_id

    def to_json(self) -> dict:
        return {
            "members": [{"pk": m.pk.hex(), "pseudonym": m.pseudonym.hex()} for m in self.members],
            "seed": self.seed.hex(),
            "enclave_hash": self.enclave_hash.hex(),
            "provider_pk": self.provider_pk.hex(),
            "proof": self.proof.hex(),
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Genesis":
        from ..core.params import ProtocolParams

        members = tuple(
            GenesisMember(bytes.fromhex(m["pk"]), bytes.fromhex(m.get("pseudonym", ""))) for m in data["members"]
        )
        params = ProtocolParams.from_dict(data.get("params", {}))
        g = cls.make(
            members,
            bytes.fromhex(data["seed"]),
            params,
            bytes.fromhex(data.get("enclave_hash", "00" * 32)),
            bytes.fromhex(data.get("provider_pk", "")),
        )
        if "proof" in data and bytes.fromhex(data["proof"]) != g.proof:
            raise DecodeError("genesis proof does not match members and seed")
        return g
