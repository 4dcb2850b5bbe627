"""Per-block branch state and the block transition function.

A ``BranchState`` summarises everything selection and validation need about
the branch ending at one block. States are never mutated after creation;
``transition`` builds the child state, copying only what the block changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.crypto import pk_hash, verify, vrf_verify
from ..core.verdict import Verdict
from ..identity.messages import AttestedEnrollMsg, MinedEnrollMsg
from ..identity.records import IdentityKind, IdentityRecord
from ..identity.validate import validate_attested_enrollment, validate_mined_enrollment
from ..selection.queue import age_order, skip_walk
from .messages import Block, tx_hash

NEVER = -(1 << 62)


@dataclass
class BranchState:
    params: object
    chain_id: bytes
    height: int
    round: int
    block_hash: bytes
    seed: bytes
    registry: tuple
    pk_index: dict
    pkh_index: dict
    nym_index: dict
    last_created: list
    last_confirm: list
    marks: dict
    consumed: frozenset
    head: int | None = None
    head_since: int = 1
    leader: int | None = None
    weight: int = 0
    _order: list | None = field(default=None, repr=False)

    @property
    def order(self) -> list[int]:
        if self._order is None:
            self._order = age_order(self, self.params.activity_threshold)
        return self._order

    def record(self, idx: int) -> IdentityRecord:
        return self.registry[idx].with_creation(self.last_created[idx])

    def record_for_pk(self, pk: bytes) -> IdentityRecord | None:
        i = self.pk_index.get(pk)
        return None if i is None else self.record(i)

    def age(self, idx: int, round_: int) -> int:
        return round_ - self.last_created[idx]


def genesis_state(genesis) -> BranchState:
    cid = genesis.chain_id
    reg = tuple(
        IdentityRecord(
            pk=m.pk,
            enroll_round=0,
            enroll_block=cid,
            enroll_index=i,
            kind=IdentityKind.GENESIS,
            pseudonym=m.pseudonym or None,
            enroll_height=0,
        )
        for i, m in enumerate(genesis.members)
    )
    n = len(reg)
    st = BranchState(
        params=genesis.params,
        chain_id=cid,
        height=0,
        round=0,
        block_hash=cid,
        seed=genesis.seed,
        registry=reg,
        pk_index={r.pk: i for i, r in enumerate(reg)},
        pkh_index={pk_hash(r.pk): i for i, r in enumerate(reg)},
        nym_index={r.pseudonym: i for i, r in enumerate(reg) if r.pseudonym},
        last_created=[0] * n,
        last_confirm=[NEVER] * n,
        marks={},
        consumed=frozenset(),
    )
    order = st.order
    st.head = order[0] if order else None
    st.head_since = 1
    return st


class EnrollView:
    """Branch lookups for enrollment checks inside one block, including earlier
    enrollments of the same block."""

    def __init__(self, store, parent: BranchState, round_: int):
        self.store = store
        self.parent = parent
        self.chain_id = parent.chain_id
        self.round = round_ - 1
        self.enclave_hash = store.genesis.enclave_hash
        self.provider_pk = store.genesis.provider_pk
        self.new_records: dict[bytes, IdentityRecord] = {}
        self.new_nyms: dict[bytes, bytes] = {}
        self.spent: set[bytes] = set()

    def creator_of(self, h: bytes):
        hdr = self.store.headers.get(h)
        if hdr is None or hdr.leader_pk is None or not self.store.is_ancestor(h, self.parent.block_hash):
            return None
        return hdr.leader_pk

    def contains(self, h: bytes) -> bool:
        return h in self.store.headers and self.store.is_ancestor(h, self.parent.block_hash)

    def reward_consumed(self, h: bytes) -> bool:
        return h in self.parent.consumed or h in self.spent

    def record_for_pk(self, pk: bytes):
        if pk in self.new_records:
            return self.new_records[pk]
        return self.parent.record_for_pk(pk)

    def pseudonym_owner(self, nym: bytes):
        if nym in self.new_nyms:
            return self.new_nyms[nym]
        i = self.parent.nym_index.get(nym)
        return None if i is None else self.parent.registry[i].pk


def check_enrollment(view: EnrollView, msg, params) -> Verdict:
    if isinstance(msg, MinedEnrollMsg):
        return validate_mined_enrollment(view, msg, params.identity_reward_cost)
    if isinstance(msg, AttestedEnrollMsg):
        return validate_attested_enrollment(view, msg)
    return Verdict.reject("unknown-kind")


def transition(store, parent: BranchState, block: Block) -> tuple[Verdict, BranchState | None]:
    """Validate ``block`` on top of ``parent`` and return the child state."""
    params = parent.params
    height = parent.height + 1
    intent = block.intent
    r = intent.round
    if intent.chain_id != parent.chain_id or intent.prev_hash != parent.block_hash or r <= parent.round:
        return Verdict.reject("linkage", height), None
    leader = parent.pk_index.get(intent.candidate_pk)
    if not store.intent_ok(intent):
        return Verdict.reject("bad-signature", height), None

    order = parent.order
    skipped, since = skip_walk(order, parent.head_since, r, params.n_candidates)
    if leader is None or leader not in order[skipped : skipped + params.n_candidates]:
        return Verdict.reject("not-candidate", height), None
    if tx_hash(block.txs) != intent.tx_hash:
        return Verdict.reject("tx-mismatch", height), None

    committee = store.committee(parent.block_hash, r)
    ih = intent.intent_hash
    lh = pk_hash(intent.candidate_pk)
    seen: set[int] = set()
    weight = 0
    for c in block.confirms:
        e = parent.pkh_index.get(c.endorser_pk_hash)
        if (
            e is None
            or e in seen
            or c.chain_id != parent.chain_id
            or e not in committee
            or c.intent_hash != ih
            or c.leader_pk_hash != lh
            or not verify(parent.registry[e].pk, c.body(), c.sig)
        ):
            return Verdict.reject("bad-endorsement", height), None
        seen.add(e)
        weight += committee[e]
    if weight < params.quorum:
        return Verdict.reject("quorum-short", height), None
    if not vrf_verify(intent.candidate_pk, parent.seed, block.seed, block.proof):
        return Verdict.reject("bad-vrf", height), None

    view = EnrollView(store, parent, r)
    for j, msg in enumerate(block.enrolls):
        if not check_enrollment(view, msg, params):
            return Verdict.reject("bad-enroll", height), None
        stage_enrollment(view, msg, r, height, j)
    if not verify(intent.candidate_pk, block.signing_body(), block.sig):
        return Verdict.reject("bad-signature", height), None

    return Verdict.accept(), _child_state(parent, block, leader, order, skipped, since, seen, weight, view, height)


def stage_enrollment(view: EnrollView, msg, r: int, height: int, pos: int) -> None:
    if isinstance(msg, MinedEnrollMsg):
        view.spent.update(msg.reward_block_hashes)
        rec = IdentityRecord(msg.new_pk, r, b"", pos, IdentityKind.MINED, None, enroll_height=height)
    else:
        nym = msg.quote.pseudonym
        rec = IdentityRecord(msg.pk_n, r, b"", pos, IdentityKind.ATTESTED, nym, enroll_height=height)
        view.new_nyms[nym] = msg.pk_n
    view.new_records[rec.pk] = rec


def _child_state(parent, block, leader, order, skipped, since, endorsers, weight, view, height) -> BranchState:
    params = parent.params
    r = block.round
    last_created = list(parent.last_created)
    last_confirm = list(parent.last_confirm)
    marks = parent.marks
    if skipped:
        marks = dict(marks)
        for i in order[:skipped]:
            marks[i] = height
    for e in endorsers:
        last_confirm[e] = height
        if e in marks:
            # a skipped identity that is heard from again rejoins at the back of the queue
            if marks is parent.marks:
                marks = dict(marks)
            del marks[e]
            last_created[e] = r
    last_created[leader] = r

    registry, pk_index, pkh_index, nym_index = parent.registry, parent.pk_index, parent.pkh_index, parent.nym_index
    consumed = parent.consumed
    if view.new_records:
        bh = block.block_hash
        registry = list(registry)
        pk_index, pkh_index, nym_index = dict(pk_index), dict(pkh_index), dict(nym_index)
        consumed = consumed | view.spent
        for rec in view.new_records.values():
            rec = IdentityRecord(
                rec.pk, rec.enroll_round, bh, rec.enroll_index, rec.kind, rec.pseudonym, enroll_height=height
            )
            idx = pk_index.get(rec.pk)
            if idx is None:
                idx = len(registry)
                registry.append(rec)
                last_created.append(r)
                last_confirm.append(NEVER)
                pk_index[rec.pk] = idx
                pkh_index[pk_hash(rec.pk)] = idx
            else:
                registry[idx] = rec
                last_created[idx] = r
                if idx in marks:
                    marks = dict(marks)
                    del marks[idx]
            if rec.pseudonym:
                nym_index[rec.pseudonym] = idx
        registry = tuple(registry)

    child = BranchState(
        params=params,
        chain_id=parent.chain_id,
        height=height,
        round=r,
        block_hash=block.block_hash,
        seed=block.seed,
        registry=registry,
        pk_index=pk_index,
        pkh_index=pkh_index,
        nym_index=nym_index,
        last_created=last_created,
        last_confirm=last_confirm,
        marks=marks,
        consumed=consumed,
        leader=leader,
        weight=weight,
    )
    walked_head = order[skipped] if skipped < len(order) else None
    new_order = child.order
    child.head = new_order[0] if new_order else None
    if child.head is not None and child.head == walked_head and leader != walked_head:
        child.head_since = since
    else:
        child.head_since = r + 1
    return child
