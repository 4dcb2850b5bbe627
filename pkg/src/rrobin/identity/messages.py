"""Enrollment messages and the mock attestation quote."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from ..core.crypto import DIGEST_SIZE, KeyPair, Tag, hash_parts, sign
from ..core.encoding import DecodeError, Reader, Writer

KIND_MINED = 1
KIND_ATTESTED = 2


@dataclass(frozen=True)
class MinedEnrollMsg:
    reward_block_hashes: tuple[bytes, ...]
    new_pk: bytes
    sig_m: bytes

    @staticmethod
    def signed_body(hashes, new_pk: bytes) -> bytes:
        w = Writer().raw(Tag.ENROLL_MINED).u32(len(hashes))
        for h in hashes:
            w.raw(h)
        return w.blob(new_pk).getvalue()

    @classmethod
    def create(cls, rewarded: KeyPair, hashes, new_pk: bytes) -> "MinedEnrollMsg":
        hashes = tuple(hashes)
        return cls(hashes, new_pk, sign(rewarded, cls.signed_body(hashes, new_pk)))

    def encode_into(self, w: Writer) -> None:
        w.u8(KIND_MINED).u32(len(self.reward_block_hashes))
        for h in self.reward_block_hashes:
            w.raw(h)
        w.blob(self.new_pk).blob(self.sig_m)

    @property
    def pk(self) -> bytes:
        return self.new_pk


@dataclass(frozen=True)
class AttestationQuote:
    pseudonym: bytes
    userdata: bytes
    enclave_hash: bytes
    provider_sig: bytes

    @staticmethod
    def signed_body(pseudonym: bytes, userdata: bytes, enclave_hash: bytes) -> bytes:
        return Writer().raw(Tag.QUOTE).blob(pseudonym).raw(userdata).raw(enclave_hash).getvalue()

    def encode_into(self, w: Writer) -> None:
        w.blob(self.pseudonym).raw(self.userdata).raw(self.enclave_hash).blob(self.provider_sig)

    @classmethod
    def decode_from(cls, r: Reader) -> "AttestationQuote":
        return cls(r.blob(256), r.fixed(DIGEST_SIZE), r.fixed(DIGEST_SIZE), r.blob(256))


def enrollment_userdata(chain_id: bytes, pk: bytes, round_: int, branch_hash: bytes) -> bytes:
    return hash_parts(Tag.USERDATA, chain_id, Writer().blob(pk).u64(round_).getvalue(), branch_hash)


@dataclass(frozen=True)
class AttestedEnrollMsg:
    quote: AttestationQuote
    pk_n: bytes
    round: int
    branch_hash: bytes
    reenroll: bool = False

    def encode_into(self, w: Writer) -> None:
        w.u8(KIND_ATTESTED)
        self.quote.encode_into(w)
        w.blob(self.pk_n).u64(self.round).raw(self.branch_hash).u8(1 if self.reenroll else 0)

    @property
    def pk(self) -> bytes:
        return self.pk_n


EnrollMsg = MinedEnrollMsg | AttestedEnrollMsg


def encode_enroll(msg: EnrollMsg) -> bytes:
    w = Writer()
    msg.encode_into(w)
    return w.getvalue()


def decode_enroll_from(r: Reader) -> EnrollMsg:
    kind = r.u8()
    if kind == KIND_MINED:
        n = r.count(1024)
        hashes = tuple(r.fixed(DIGEST_SIZE) for _ in range(n))
        return MinedEnrollMsg(hashes, r.blob(64), r.blob(128))
    if kind == KIND_ATTESTED:
        quote = AttestationQuote.decode_from(r)
        pk = r.blob(64)
        rnd = r.u64()
        bh = r.fixed(DIGEST_SIZE)
        flag = r.u8()
        if flag > 1:
            raise DecodeError("bad re-enroll flag")
        return AttestedEnrollMsg(quote, pk, rnd, bh, bool(flag))
    raise DecodeError(f"unknown enrollment kind {kind}")


def decode_enroll(data: bytes) -> EnrollMsg:
    r = Reader(data)
    msg = decode_enroll_from(r)
    r.done()
    return msg
