from __future__ import annotations

from dataclasses import dataclass

from ..core.crypto import pk_hash, verify
from ..core.verdict import Verdict
from .messages import Block, ConfirmMsg, Genesis, IntentMsg
from .store import Branch, ChainStore, Status


def load_branch(store: ChainStore, blocks) -> tuple[bytes, Verdict]:
    """Append ``blocks`` in order from genesis; stop at the first failure."""
    prev = store.genesis_hash
    for height, b in enumerate(blocks, start=1):
        if b.prev_hash != prev:
            return prev, Verdict.reject("linkage", height)
        out = store.add(b)
        if out.status is Status.INVALID:
            return prev, Verdict(False, out.verdict.reason, height)
        if out.status not in (Status.ACCEPTED, Status.DUPLICATE):
            return prev, Verdict.reject("linkage", height)
        prev = b.block_hash
    return prev, Verdict.accept()


def verify_branch(blocks, genesis: Genesis) -> Verdict:
    """Walk ``blocks`` from genesis and report the first invalid block's height."""
    if not genesis.proof_ok():
        return Verdict.reject("bad-genesis", 0)
    _, verdict = load_branch(ChainStore(genesis), blocks)
    return verdict


def verify_endorsement(confirm: ConfirmMsg, block: Block, prefix: Branch) -> bool:
    """Check one confirmation of ``block`` against the branch ending at its parent."""
    st = prefix.state
    if confirm.chain_id != block.intent.chain_id or confirm.chain_id != st.chain_id:
        return False
    e = st.pkh_index.get(confirm.endorser_pk_hash)
    if e is None or e not in prefix.store.committee(prefix.tip, block.round):
        return False
    if confirm.intent_hash != block.intent.intent_hash:
        return False
    if confirm.leader_pk_hash != pk_hash(block.leader_pk):
        return False
    return verify(st.registry[e].pk, confirm.body(), confirm.sig)


@dataclass(frozen=True)
class Evidence:
    endorser_pk_hash: bytes
    round: int
    first: ConfirmMsg
    second: ConfirmMsg


def detect_equivocation(confirms, intents: dict[bytes, IntentMsg], keys: dict[bytes, bytes]) -> list[Evidence]:
    """Pairs of validly signed confirmations by one endorser for two intents of the same round.

    ``intents`` maps intent hash to intent; ``keys`` maps endorser pk-hash to pk.
    Confirmations whose intent or key is unknown, or whose signature fails,
    cannot serve as evidence and are ignored.
    """
    by_slot: dict[tuple[bytes, int], dict[bytes, ConfirmMsg]] = {}
    for c in confirms:
        intent = intents.get(c.intent_hash)
        pk = keys.get(c.endorser_pk_hash)
        if intent is None or pk is None or not verify(pk, c.body(), c.sig):
            continue
        by_slot.setdefault((c.endorser_pk_hash, intent.round), {}).setdefault(c.intent_hash, c)
    out = []
    for (who, rnd), seen in sorted(by_slot.items()):
        items = sorted(seen.items())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                out.append(Evidence(who, rnd, items[i][1], items[j][1]))
    return out
