"""Enrollment validation against a branch view.

The view is any object exposing the lookups below; the chain module supplies
one backed by a branch state. Keeping the interface small lets the rules be
tested on hand-built toy chains.

    chain_id, enclave_hash, provider_pk, round
    creator_of(block_hash) -> pk or None when the block is not on the branch
    reward_consumed(block_hash) -> bool
    contains(block_hash) -> bool
    record_for_pk(pk) -> IdentityRecord or None
    pseudonym_owner(pseudonym) -> pk or None
"""

from __future__ import annotations

from ..core.crypto import verify
from ..core.verdict import Verdict
from .messages import AttestedEnrollMsg, MinedEnrollMsg, enrollment_userdata
from .mock_ias import verify_quote
from .records import IdentityKind


def validate_mined_enrollment(view, msg: MinedEnrollMsg, reward_cost: int) -> Verdict:
    hashes = msg.reward_block_hashes
    if len(hashes) != reward_cost or len(set(hashes)) != len(hashes):
        return Verdict.reject("unknown-block")
    creators = []
    for h in hashes:
        pk = view.creator_of(h)
        if pk is None:
            return Verdict.reject("unknown-block")
        creators.append(pk)
    if any(view.reward_consumed(h) for h in hashes):
        return Verdict.reject("reused-reward")
    if len(set(creators)) != 1:
        return Verdict.reject("mixed-creators")
    if not verify(creators[0], MinedEnrollMsg.signed_body(hashes, msg.new_pk), msg.sig_m):
        return Verdict.reject("bad-signature")
    if view.record_for_pk(msg.new_pk) is not None:
        return Verdict.reject("duplicate-pk")
    return Verdict.accept()


def validate_attested_enrollment(view, msg: AttestedEnrollMsg, provider_pk: bytes | None = None) -> Verdict:
    provider = view.provider_pk if provider_pk is None else provider_pk
    q = msg.quote
    if not verify_quote(provider, q):
        return Verdict.reject("bad-provider-sig")
    expected = enrollment_userdata(view.chain_id, msg.pk_n, msg.round, msg.branch_hash)
    if q.userdata != expected or not view.contains(msg.branch_hash) or msg.round > view.round + 1:
        return Verdict.reject("binding-mismatch")
    if q.enclave_hash != view.enclave_hash:
        return Verdict.reject("wrong-enclave")
    owner = view.pseudonym_owner(q.pseudonym)
    existing = view.record_for_pk(msg.pk_n)
    if msg.reenroll:
        if existing is None or existing.kind is not IdentityKind.ATTESTED or owner != msg.pk_n:
            return Verdict.reject("reenroll-mismatch")
        return Verdict.accept()
    if owner is not None:
        return Verdict.reject("duplicate-pseudonym")
    if existing is not None:
        return Verdict.reject("duplicate-pk")
    return Verdict.accept()
