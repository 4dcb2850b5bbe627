"""Block storage: validated blocks, branch tips, orphans and shared caches."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum

from ..core.crypto import verify
from ..core.verdict import Verdict
from ..selection.ops import endorser_population
from ..selection.queue import candidates_at
from ..selection.sampling import sample_indices
from .messages import Block, Genesis, IntentMsg
from .state import BranchState, genesis_state, transition


@dataclass(frozen=True)
class Header:
    block_hash: bytes
    parent: bytes | None
    height: int
    round: int
    leader_pk: bytes | None
    weight: int = 0


class Status(str, Enum):
    ACCEPTED = "accepted"
    DUPLICATE = "duplicate"
    ORPHAN = "orphan"
    INVALID = "invalid"
    STALE = "stale"


@dataclass
class AddOutcome:
    status: Status
    verdict: Verdict | None = None
    connected: list = field(default_factory=list)


class ChainStore:
    """All blocks known so far, keyed by hash, with one validated state per block.

    Validation results are cached by block hash; a block is validated once no
    matter how many branches or nodes look at it.
    """

    def __init__(self, genesis: Genesis, orphan_limit: int = 4096):
        self.genesis = genesis
        self.params = genesis.params
        self.chain_id = genesis.chain_id
        g = genesis.chain_id
        self.headers: dict[bytes, Header] = {g: Header(g, None, 0, 0, None)}
        self.states: dict[bytes, BranchState] = {g: genesis_state(genesis)}
        self.blocks: dict[bytes, Block] = {}
        self.children: dict[bytes, list[bytes]] = defaultdict(list)
        self.invalid: dict[bytes, Verdict] = {}
        self.orphans: dict[bytes, dict[bytes, Block]] = defaultdict(dict)
        self.orphan_limit = orphan_limit
        self._orphan_count = 0
        self._committees: dict[tuple[bytes, int], dict[int, int]] = {}
        self._intents: dict[bytes, bool] = {}
        self._cands: dict[tuple[bytes, int], list[int]] = {}
        self._ranks: dict[bytes, int | None] = {}
        self._by_height: dict[int, list[bytes]] = defaultdict(list)
        self.pruned_below = 1

    # lookups -----------------------------------------------------------

    @property
    def genesis_hash(self) -> bytes:
        return self.chain_id

    def __contains__(self, h: bytes) -> bool:
        return h in self.headers

    def height_of(self, h: bytes) -> int:
        return self.headers[h].height

    def ancestor(self, h: bytes, height: int) -> bytes:
        hdr = self.headers[h]
        while hdr.height > height:
            hdr = self.headers[hdr.parent]
        return hdr.block_hash

    def is_ancestor(self, a: bytes, b: bytes) -> bool:
        """True when ``a`` is ``b`` or lies on the path from genesis to ``b``."""
        ha = self.headers.get(a)
        hb = self.headers.get(b)
        if ha is None or hb is None or ha.height > hb.height:
            return False
        return self.ancestor(b, ha.height) == a

    def lca(self, a: bytes, b: bytes) -> bytes:
        ha, hb = self.headers[a], self.headers[b]
        while ha.height > hb.height:
            ha = self.headers[ha.parent]
        while hb.height > ha.height:
            hb = self.headers[hb.parent]
        while ha.block_hash != hb.block_hash:
            ha = self.headers[ha.parent]
            hb = self.headers[hb.parent]
        return ha.block_hash

    def path(self, tip: bytes) -> list[bytes]:
        """Block hashes from height 1 up to ``tip``."""
        out = []
        hdr = self.headers[tip]
        while hdr.parent is not None:
            out.append(hdr.block_hash)
            hdr = self.headers[hdr.parent]
        out.reverse()
        return out

    def anchor_state(self, tip: bytes, depth: int) -> BranchState:
        """State of the block ``depth - 1`` below ``tip`` (genesis when shorter)."""
        height = max(0, self.headers[tip].height - (depth - 1))
        return self.states[self.ancestor(tip, height)]

    def branch(self, tip: bytes | None = None) -> "Branch":
        return Branch(self, self.genesis_hash if tip is None else tip)

    def tips(self) -> list[bytes]:
        return [h for h in self.states if not any(c in self.states for c in self.children.get(h, ()))]

    # shared caches -----------------------------------------------------

    def intent_ok(self, intent: IntentMsg) -> bool:
        ih = intent.intent_hash
        ok = self._intents.get(ih)
        if ok is None:
            ok = verify(intent.candidate_pk, intent.body(), intent.sig)
            self._intents[ih] = ok
        return ok

    def candidates(self, parent_hash: bytes, round_: int) -> list[int]:
        """Identity indices allowed to lead ``round_`` on top of ``parent_hash``, oldest first."""
        key = (parent_hash, round_)
        got = self._cands.get(key)
        if got is None:
            got = candidates_at(self.states[parent_hash], round_, self.params.n_candidates)
            self._cands[key] = got
        return got

    def intent_rank(self, intent: IntentMsg) -> int | None:
        """Sender's position among the candidates of the intent's branch, or None if invalid.

        Only branch-independent checks happen here; whether a node has seen the
        referenced block is the node's business.
        """
        key = intent.intent_hash
        got = self._ranks.get(key, -1)
        if got != -1:
            return got
        got = None
        prev = intent.prev_hash
        st = self.states.get(prev)
        if st is not None and intent.chain_id == self.chain_id and intent.round > st.round:
            sender = st.pk_index.get(intent.candidate_pk)
            cands = self.candidates(prev, intent.round)
            if sender is not None and sender in cands and self.intent_ok(intent):
                got = cands.index(sender)
        self._ranks[key] = got
        return got

    def committee(self, parent_hash: bytes, round_: int) -> dict[int, int]:
        """Endorser index -> slot multiplicity for a block at ``round_`` on ``parent_hash``."""
        key = (parent_hash, round_)
        got = self._committees.get(key)
        if got is None:
            params = self.params
            anchor = self.anchor_state(parent_hash, params.confirm_depth)
            pop = endorser_population(anchor, round_, params)
            if pop:
                draws = sample_indices(anchor.seed, round_, len(pop), params.n_endorsers)
                got = dict(Counter(pop[k] for k in draws))
            else:
                got = {}
            self._committees[key] = got
        return got

    # insertion ---------------------------------------------------------

    def add(self, block: Block) -> AddOutcome:
        h = block.block_hash
        if h in self.headers:
            return AddOutcome(Status.DUPLICATE)
        if h in self.invalid:
            return AddOutcome(Status.INVALID, self.invalid[h])
        parent = block.prev_hash
        if parent not in self.headers:
            if parent in self.invalid:
                v = Verdict.reject("invalid-parent")
                self.invalid[h] = v
                return AddOutcome(Status.INVALID, v)
            if self._orphan_count < self.orphan_limit and h not in self.orphans[parent]:
                self.orphans[parent][h] = block
                self._orphan_count += 1
            return AddOutcome(Status.ORPHAN)
        pstate = self.states.get(parent)
        if pstate is None:
            return AddOutcome(Status.STALE)
        verdict = self._connect(block, pstate)
        if not verdict:
            return AddOutcome(Status.INVALID, verdict)
        connected = [h]
        frontier = [h]
        while frontier:
            p = frontier.pop()
            waiting = self.orphans.pop(p, None)
            if not waiting:
                continue
            self._orphan_count -= len(waiting)
            for ob in waiting.values():
                if self._connect(ob, self.states[p]):
                    connected.append(ob.block_hash)
                    frontier.append(ob.block_hash)
        return AddOutcome(Status.ACCEPTED, verdict, connected)

    def _connect(self, block: Block, pstate: BranchState) -> Verdict:
        verdict, child = transition(self, pstate, block)
        h = block.block_hash
        if child is None:
            self.invalid[h] = verdict
            return verdict
        self.headers[h] = Header(h, block.prev_hash, child.height, child.round, block.leader_pk, child.weight)
        self.states[h] = child
        self.blocks[h] = block
        self.children[block.prev_hash].append(h)
        self._by_height[child.height].append(h)
        return verdict

    def prune(self, below_height: int) -> None:
        """Forget states, bodies and caches of blocks under ``below_height``; headers stay."""
        if below_height <= self.pruned_below:
            return
        for height in range(self.pruned_below, below_height):
            for h in self._by_height.pop(height, ()):
                self.states.pop(h, None)
                self.blocks.pop(h, None)
        self._committees = {k: v for k, v in self._committees.items() if k[0] in self.states}
        self._cands = {k: v for k, v in self._cands.items() if k[0] in self.states}
        self._intents.clear()
        self._ranks.clear()
        for p in [p for p in self.orphans if p in self.headers and self.headers[p].height < below_height]:
            self._orphan_count -= len(self.orphans.pop(p))
        self.pruned_below = below_height


class Branch:
    """The path from genesis to ``tip`` inside a store."""

    __slots__ = ("store", "tip")

    def __init__(self, store: ChainStore, tip: bytes):
        self.store = store
        self.tip = tip

    @property
    def state(self) -> BranchState:
        return self.store.states[self.tip]

    @property
    def height(self) -> int:
        return self.store.headers[self.tip].height

    @property
    def round(self) -> int:
        return self.store.headers[self.tip].round

    def hashes(self) -> list[bytes]:
        return self.store.path(self.tip)

    def blocks(self) -> list[Block]:
        return [self.store.blocks[h] for h in self.hashes()]

    def __eq__(self, other) -> bool:
        return isinstance(other, Branch) and other.store is self.store and other.tip == self.tip

    def __hash__(self) -> int:
        return hash(self.tip)

    def __repr__(self) -> str:
        return f"Branch(height={self.height}, tip={self.tip.hex()[:12]})"
