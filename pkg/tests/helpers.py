"""Block forging for hand-built chains and forks."""

from __future__ import annotations

import random

from rrobin.chain import Block, ChainStore, ConfirmMsg, Genesis, IntentMsg, tx_hash
from rrobin.core import KeyPair, ProtocolParams, vrf_evaluate


def make_keys(n: int, seed: int = 0, scheme: str = "sim") -> list[KeyPair]:
    rng = random.Random(seed)
    return [KeyPair.from_seed(rng.randbytes(32), scheme) for _ in range(n)]


def small_params(**kw) -> ProtocolParams:
    base = dict(n_candidates=3, n_endorsers=8, quorum=5, activity_threshold=1000, enroll_threshold=4, confirm_depth=3)
    base.update(kw)
    return ProtocolParams(**base)


def toy_chain(n: int = 6, seed: int = 0, params: ProtocolParams | None = None, scheme: str = "sim"):
    params = params or small_params()
    keys = make_keys(n, seed, scheme)
    genesis = Genesis.make([k.pk for k in keys], bytes([seed % 256]) * 32, params)
    store = ChainStore(genesis)
    return store, {k.pk: k for k in keys}, keys


def forge(store: ChainStore, parent: bytes, key: KeyPair, round_: int, keys: dict, *, txs=(), enrolls=(),
          confirmers=None, drop_weight: int = 0) -> Block:
    """A block by ``key`` on ``parent`` carrying confirms from every committee member (or ``confirmers``)."""
    st = store.states[parent]
    intent = IntentMsg.create(key, store.chain_id, round_, parent, tx_hash(txs))
    committee = store.committee(parent, round_)
    members = [st.registry[i].pk for i in sorted(committee)]
    if confirmers is not None:
        members = [pk for pk in members if pk in confirmers]
    confirms = sorted((ConfirmMsg.create(keys[pk], intent) for pk in members), key=lambda c: c.endorser_pk_hash)
    su = vrf_evaluate(key, st.seed)
    return Block.create(key, intent, confirms, txs, enrolls, su.seed, su.proof)


def head_key(store: ChainStore, parent: bytes, round_: int, keys: dict, rank: int = 0) -> KeyPair:
    st = store.states[parent]
    return keys[st.registry[store.candidates(parent, round_)[rank]].pk]


def grow(store: ChainStore, keys: dict, rounds, parent: bytes | None = None, rank: int = 0) -> list[Block]:
    """Append one block per round in ``rounds``, each by the candidate at ``rank``."""
    tip = store.genesis_hash if parent is None else parent
    out = []
    for r in rounds:
        b = forge(store, tip, head_key(store, tip, r, keys, rank), r, keys)
        res = store.add(b)
        assert res.verdict, res.verdict
        tip = b.block_hash
        out.append(b)
    return out


def aged_fork():
    """Eight members, all candidates; rounds 1..7 led in queue order so ages spread 1..8 at round 8."""
    params = small_params(n_candidates=8)
    store, keys, _ = toy_chain(8, seed=4, params=params)
    base = grow(store, keys, range(1, 8))
    return store, keys, base[-1].block_hash


def sequential_pick(store: ChainStore, parent: bytes, blocks) -> Block:
    """Walk siblings in order and keep the current pick unless the newcomer beats it at the fork."""
    st = store.states[parent]
    selected = blocks[0]
    for cur in blocks[1:]:
        ls, lc = st.pk_index[selected.leader_pk], st.pk_index[cur.leader_pk]
        age_s, age_c = st.age(ls, selected.round), st.age(lc, cur.round)
        if age_c > age_s:
            selected = cur
        elif age_c == age_s:
            if ls != lc:
                rs, rc = st.registry[ls], st.registry[lc]
                if (rc.enroll_height, rc.enroll_index) < (rs.enroll_height, rs.enroll_index):
                    selected = cur
            elif selected.encoded < cur.encoded:
                selected = cur
    return selected


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
