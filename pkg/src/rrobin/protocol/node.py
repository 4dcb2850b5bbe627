"""Per-node round state machine: intent, confirmation and block phases.

Nodes never talk to each other directly. Each callback returns ``Send``
records and the caller (the simulator, or a test) decides who receives what
and when.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..chain.forkchoice import prefer
from ..chain.messages import Block, ConfirmMsg, IntentMsg, tx_hash
from ..chain.store import ChainStore, Status
from ..core.crypto import KeyPair, verify, vrf_evaluate


class Phase(str, Enum):
    IDLE = "idle"
    INTENT = "intent"
    CONFIRM = "confirm"
    BLOCK = "block"


@dataclass(frozen=True)
class Send:
    kind: str
    msg: object
    to: bytes | None = None
    only: frozenset | None = None
    delay_ms: int = 0


@dataclass
class Proposal:
    intent: IntentMsg
    txs: tuple
    prev: bytes
    confirms: dict = field(default_factory=dict)
    weight: int = 0


class SetView:
    """Which blocks a standalone node has seen."""

    def __init__(self, initial=()):
        self._seen = set(initial)

    def knows(self, h: bytes) -> bool:
        return h in self._seen

    def learn(self, h: bytes) -> None:
        self._seen.add(h)


@dataclass
class NodeStats:
    late_intents: int = 0
    late_confirms: int = 0
    invalid_blocks: int = 0
    invalid_reasons: dict = field(default_factory=dict)
    reorgs: list = field(default_factory=list)
    max_reorg: int = 0


class Node:
    honest = True

    def __init__(self, key: KeyPair, store: ChainStore, *, txpool=None, enrollpool=None, view=None, name: int = 0):
        self.key = key
        self.pk = key.pk
        self.store = store
        self.params = store.params
        self.txpool = txpool
        self.enrollpool = enrollpool
        self.view = view if view is not None else SetView((store.genesis_hash,))
        self.name = name
        self.tip = store.genesis_hash
        self.round = 0
        self.phase = Phase.IDLE
        self.intents_rx: list[IntentMsg] = []
        self.proposals: dict[bytes, Proposal] = {}
        self.waiting: dict[bytes, list[Block]] = {}
        self.stats = NodeStats()

    # helpers -----------------------------------------------------------

    def index_on(self, h: bytes) -> int | None:
        return self.store.states[h].pk_index.get(self.pk)

    def is_candidate(self, prev: bytes, round_: int) -> bool:
        idx = self.index_on(prev)
        return idx is not None and idx in self.store.candidates(prev, round_)

    def weight_on(self, prev: bytes, round_: int) -> int:
        idx = self.index_on(prev)
        return 0 if idx is None else self.store.committee(prev, round_).get(idx, 0)

    def choose_txs(self, prev: bytes) -> tuple:
        return tuple(self.txpool.select(self.store, prev)) if self.txpool else ()

    def choose_enrolls(self, prev: bytes, round_: int) -> tuple:
        return tuple(self.enrollpool.select(self.store, prev, round_)) if self.enrollpool else ()

    def make_proposal(self, prev: bytes, round_: int, txs=None) -> Proposal:
        txs = self.choose_txs(prev) if txs is None else tuple(txs)
        intent = IntentMsg.create(self.key, self.store.chain_id, round_, prev, tx_hash(txs))
        p = Proposal(intent, txs, prev)
        self.proposals[intent.intent_hash] = p
        return p

    # phase callbacks ---------------------------------------------------

    def on_round_start(self, round_: int) -> list[Send]:
        self.round = round_
        self.phase = Phase.INTENT
        self.intents_rx = []
        self.proposals = {}
        if not self.is_candidate(self.tip, round_):
            return []
        intent = self.make_proposal(self.tip, round_).intent
        # broadcasts skip the sender, so a leader hears its own intent here
        self.intents_rx.append(intent)
        return [Send("intent", intent)]

    def receive_intent(self, intent: IntentMsg) -> None:
        if self.phase is not Phase.INTENT or intent.round != self.round:
            self.stats.late_intents += 1
            return
        self.intents_rx.append(intent)

    def valid_intents(self) -> dict[bytes, list[tuple[int, IntentMsg]]]:
        """Received intents that pass checks, grouped by the branch they extend, oldest sender first."""
        st = self.store
        by_prev: dict[bytes, list[tuple[int, IntentMsg]]] = {}
        for it in self.intents_rx:
            prev = it.prev_hash
            if it.round != self.round or not self.view.knows(prev):
                continue
            rank = st.intent_rank(it)
            if rank is not None:
                by_prev.setdefault(prev, []).append((rank, it))
        for lst in by_prev.values():
            lst.sort(key=lambda x: x[0])
        return by_prev

    def best_prev(self, prevs) -> bytes:
        best = None
        for p in prevs:
            best = p if best is None else prefer(self.store, best, p)
        return best

    def endorse(self) -> list[IntentMsg]:
        """Intents this node confirms: the oldest sender on the preferred branch."""
        by_prev = self.valid_intents()
        if not by_prev:
            return []
        prev = self.best_prev(sorted(by_prev))
        return [by_prev[prev][0][1]]

    def on_intent_phase_end(self) -> list[Send]:
        self.phase = Phase.CONFIRM
        # a node holding no committee slot on any referenced branch cannot confirm anything
        prevs = {it.prev_hash for it in self.intents_rx}
        if not any(p in self.store.states and self.weight_on(p, self.round) for p in prevs):
            return []
        out = []
        for it in self.endorse():
            if self.weight_on(it.prev_hash, self.round) > 0:
                c = ConfirmMsg.create(self.key, it)
                if it.candidate_pk == self.pk:
                    self.receive_confirm(c)
                else:
                    out.append(Send("confirm", c, to=it.candidate_pk))
        return out

    def receive_confirm(self, c: ConfirmMsg) -> None:
        if self.phase is not Phase.CONFIRM:
            self.stats.late_confirms += 1
            return
        p = self.proposals.get(c.intent_hash)
        if p is None:
            return
        st = self.store.states[p.prev]
        e = st.pkh_index.get(c.endorser_pk_hash)
        if e is None or e in p.confirms:
            return
        w = self.store.committee(p.prev, self.round).get(e, 0)
        if w == 0 or not verify(st.registry[e].pk, c.body(), c.sig):
            return
        p.confirms[e] = c
        p.weight += w

    def assemble(self, p: Proposal) -> Block:
        seed_update = vrf_evaluate(self.key, self.store.states[p.prev].seed)
        confirms = sorted(self.select_confirms(p), key=lambda c: c.endorser_pk_hash)
        enrolls = self.choose_enrolls(p.prev, self.round)
        return Block.create(self.key, p.intent, confirms, p.txs, enrolls, seed_update.seed, seed_update.proof)

    def select_confirms(self, p: Proposal) -> list[ConfirmMsg]:
        return list(p.confirms.values())

    def on_confirm_phase_end(self) -> list[Send]:
        self.phase = Phase.BLOCK
        out = []
        for p in self.proposals.values():
            if p.weight >= self.params.quorum:
                block = self.assemble(p)
                self.receive_block(block)
                out.append(Send("block", block))
        return out

    # chain updates -----------------------------------------------------

    def receive_block(self, block: Block) -> bytes | None:
        """Store, validate and adopt ``block``. Returns a parent hash to fetch when unknown."""
        h = block.block_hash
        if self.view.knows(h):
            return None
        out = self.store.add(block)
        if out.status is Status.INVALID:
            self.stats.invalid_blocks += 1
            r = out.verdict.reason if out.verdict is not None else "?"
            self.stats.invalid_reasons[r] = self.stats.invalid_reasons.get(r, 0) + 1
            return None
        if out.status is Status.STALE:
            return None
        parent = block.prev_hash
        if not self.view.knows(parent) or h not in self.store.states:
            self.waiting.setdefault(parent, []).append(block)
            return None if self.view.knows(parent) else parent
        self._learn(h)
        return None

    def _learn(self, h: bytes) -> None:
        stack = [h]
        while stack:
            cur = stack.pop()
            if self.view.knows(cur) or cur not in self.store.states:
                continue
            self.view.learn(cur)
            self.adopt(cur)
            for child in self.waiting.pop(cur, ()):
                self.store.add(child)
                stack.append(child.block_hash)

    def adopt(self, h: bytes) -> None:
        best = prefer(self.store, self.tip, h)
        if best == self.tip:
            return
        old = self.tip
        if not self.store.is_ancestor(old, best):
            fork = self.store.lca(old, best)
            depth = self.store.headers[old].height - self.store.headers[fork].height
            self.stats.reorgs.append(depth)
            self.stats.max_reorg = max(self.stats.max_reorg, depth)
        self.tip = best


def on_round_start(node: Node, round_: int) -> list[Send]:
    return node.on_round_start(round_)


def on_intent_phase_end(node: Node) -> list[Send]:
    return node.on_intent_phase_end()


def on_confirm_phase_end(node: Node) -> list[Send]:
    return node.on_confirm_phase_end()


def on_block_received(node: Node, block: Block) -> bytes | None:
    return node.receive_block(block)
