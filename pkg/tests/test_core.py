import hashlib
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rrobin.core import (
    KeyPair,
    ParamError,
    ProtocolParams,
    Verdict,
    hash_bytes,
    sign,
    verify,
    vrf_evaluate,
    vrf_verify,
)
from rrobin.core.encoding import DecodeError, Reader, Writer

SCHEMES = ("ed25519", "sim")


def flip(b: bytes, bit: int) -> bytes:
    arr = bytearray(b)
    arr[bit // 8] ^= 1 << (bit % 8)
    return bytes(arr)


class TestParams:
    def test_defaults_are_the_reference_configuration(self):
        p = ProtocolParams()
        assert (p.n_candidates, p.n_endorsers, p.quorum) == (5, 100, 54)
        assert (p.activity_threshold, p.enroll_threshold, p.confirm_depth) == (20_000, 100, 12)
        assert p.round_ms == 5_000 and p.intent_ms + p.confirm_ms + p.block_ms == p.round_ms

    @pytest.mark.parametrize(
        "kw",
        [
            dict(quorum=0),
            dict(quorum=101),
            dict(n_candidates=0),
            dict(confirm_depth=0),
            dict(enroll_threshold=20_000),
            dict(identity_reward_cost=0),
            dict(intent_ms=400),
        ],
    )
    def test_inconsistent_values_are_rejected(self, kw):
        with pytest.raises(ParamError):
            ProtocolParams(**kw)

    def test_replace_rescales_phases_with_round_length(self):
        p = ProtocolParams().replace(round_ms=1000)
        assert (p.intent_ms, p.confirm_ms, p.block_ms) == (100, 100, 800)

    def test_dict_round_trip_and_unknown_keys(self):
        p = ProtocolParams(quorum=60)
        assert ProtocolParams.from_dict(p.to_dict()) == p
        with pytest.raises(ParamError):
            ProtocolParams.from_dict({"bogus": 1})


class TestHash:
    def test_empty_input_gives_the_standard_digest(self):
        assert hash_bytes(b"") == hashlib.sha256(b"").digest()
        assert len(hash_bytes(b"x")) == 32

    def test_single_bit_flip_changes_digest(self):
        rng = random.Random(11)
        for _ in range(1000):
            x = rng.randbytes(rng.randint(1, 64))
            assert hash_bytes(x) != hash_bytes(flip(x, rng.randrange(len(x) * 8)))


class TestSignatures:
    @pytest.mark.parametrize("scheme", SCHEMES)
    def test_round_trip_and_determinism(self, scheme):
        k = KeyPair.generate(random.Random(1), scheme)
        s1, s2 = sign(k, b"msg"), sign(k, b"msg")
        assert s1 == s2
        assert verify(k.pk, b"msg", s1)

    @pytest.mark.parametrize("scheme", SCHEMES)
    @given(msg=st.binary(min_size=1, max_size=40), bit=st.integers(min_value=0))
    def test_any_altered_bit_fails(self, scheme, msg, bit):
        k = KeyPair.from_seed(bytes(32), scheme)
        other = KeyPair.from_seed(bytes([1]) * 32, scheme)
        sig = sign(k, msg)
        assert not verify(k.pk, flip(msg, bit % (len(msg) * 8)), sig)
        assert not verify(k.pk, msg, flip(sig, bit % (len(sig) * 8)))
        assert not verify(other.pk, msg, sig)
        bad_pk = flip(k.pk, 8 + bit % ((len(k.pk) - 1) * 8))
        assert not verify(bad_pk, msg, sig)

    def test_malformed_inputs_return_false(self):
        k = KeyPair.from_seed(bytes(32))
        assert not verify(b"", b"m", sign(k, b"m"))
        assert not verify(k.pk, b"m", b"short")
        assert not verify(b"\x09" + k.pk[1:], b"m", sign(k, b"m"))

    def test_key_seed_must_be_32_bytes(self):
        with pytest.raises(ValueError):
            KeyPair.from_seed(b"short")


class TestVrf:
    @pytest.mark.parametrize("scheme", SCHEMES)
    def test_honest_output_verifies_and_is_deterministic(self, scheme):
        k = KeyPair.from_seed(bytes(range(32)), scheme)
        prev = hash_bytes(b"prev")
        a, b = vrf_evaluate(k, prev), vrf_evaluate(k, prev)
        assert a == b
        assert vrf_verify(k.pk, prev, a.seed, a.proof)

    def test_flipped_seed_or_foreign_prev_fails(self):
        rng = random.Random(5)
        for _ in range(50):
            k = KeyPair.generate(rng, "sim")
            prev, other = rng.randbytes(32), rng.randbytes(32)
            su = vrf_evaluate(k, prev)
            assert not vrf_verify(k.pk, prev, flip(su.seed, rng.randrange(256)), su.proof)
            assert not vrf_verify(k.pk, other, su.seed, su.proof)
            foreign = vrf_evaluate(k, other)
            assert not vrf_verify(k.pk, prev, foreign.seed, foreign.proof)

    def test_distinct_keys_give_distinct_seeds(self):
        rng = random.Random(9)
        prev = rng.randbytes(32)
        seeds = {vrf_evaluate(KeyPair.generate(rng, "ed25519"), prev).seed for _ in range(100)}
        assert len(seeds) == 100

    def test_only_one_output_verifies_per_key_and_prev(self):
        rng = random.Random(3)
        k = KeyPair.generate(rng, "ed25519")
        prev = rng.randbytes(32)
        honest = vrf_evaluate(k, prev)
        # re-evaluating many times never produces a second verifying pair
        for _ in range(20):
            again = vrf_evaluate(k, prev)
            assert (again.seed, again.proof) == (honest.seed, honest.proof)
        for bit in range(0, len(honest.proof) * 8, 7):
            assert not vrf_verify(k.pk, prev, honest.seed, flip(honest.proof, bit))

    def test_previous_seed_length_is_checked(self):
        with pytest.raises(ValueError):
            vrf_evaluate(KeyPair.from_seed(bytes(32)), b"short")
        assert not vrf_verify(KeyPair.from_seed(bytes(32)).pk, b"short", bytes(32), b"")


class TestEncoding:
    @given(a=st.integers(0, 255), b=st.integers(0, 2**32 - 1), c=st.integers(0, 2**64 - 1), blob=st.binary(max_size=100))
    def test_writer_reader_round_trip(self, a, b, c, blob):
        data = Writer().u8(a).u32(b).u64(c).blob(blob).getvalue()
        r = Reader(data)
        assert (r.u8(), r.u32(), r.u64(), r.blob()) == (a, b, c, blob)
        r.done()

    def test_truncation_and_trailing_bytes_are_errors(self):
        data = Writer().u32(7).getvalue()
        with pytest.raises(DecodeError):
            Reader(data[:3]).u32()
        r = Reader(data + b"x")
        r.u32()
        with pytest.raises(DecodeError):
            r.done()


def test_verdict_truthiness():
    assert Verdict.accept()
    v = Verdict.reject("linkage", 3)
    assert not v and v.reason == "linkage" and v.height == 3
