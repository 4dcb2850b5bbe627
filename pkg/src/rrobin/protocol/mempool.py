"""Synthetic transaction feed and pending enrollments.

Transactions are opaque to consensus. The simulator's blobs carry an 8-byte
sequence id and a 4-byte origin so leaders can tell which ones a branch
already holds and a censoring leader can recognise its victims.
"""

from __future__ import annotations

from ..chain.state import EnrollView, check_enrollment, stage_enrollment
from ..identity.messages import AttestedEnrollMsg


class TxPool:
    def __init__(self, per_round: int = 2, size: int = 250, max_per_block: int = 64):
        if size < 12:
            raise ValueError("synthetic transactions need at least 12 bytes")
        self.per_round = per_round
        self.size = size
        self.max_per_block = max_per_block
        self.origins: list[int] = []
        self._views: dict[bytes, tuple[int, frozenset]] = {}

    @property
    def generated(self) -> int:
        return len(self.origins)

    def generate(self, rng, n_origins: int) -> None:
        for _ in range(self.per_round):
            self.origins.append(rng.randrange(n_origins))

    def blob(self, tid: int) -> bytes:
        head = tid.to_bytes(8, "big") + self.origins[tid].to_bytes(4, "big")
        return head + bytes(self.size - 12)

    def parse(self, blob: bytes) -> int | None:
        if len(blob) < 12:
            return None
        tid = int.from_bytes(blob[:8], "big")
        return tid if tid < len(self.origins) else None

    def view(self, store, h: bytes) -> tuple[int, frozenset]:
        """(next unseen id, ids below it missing from the branch) for the branch ending at ``h``."""
        got = self._views.get(h)
        if got is not None:
            return got
        chain = []
        cur = h
        while cur not in self._views and cur != store.genesis_hash and cur in store.blocks:
            chain.append(cur)
            cur = store.headers[cur].parent
        nxt, missing = self._views.get(cur, (0, frozenset()))
        for bh in reversed(chain):
            ids = {t for t in map(self.parse, store.blocks[bh].txs) if t is not None}
            if ids:
                top = max(ids) + 1
                gap = {i for i in range(nxt, top) if i not in ids} if top > nxt else set()
                missing = (missing - ids) | gap
                nxt = max(nxt, top)
            self._views[bh] = (nxt, frozenset(missing))
        return self._views.get(h, (nxt, frozenset(missing)))

    def select(self, store, tip: bytes, skip_origins=frozenset()) -> list[bytes]:
        nxt, missing = self.view(store, tip)
        out = []
        for tid in sorted(missing):
            if len(out) >= self.max_per_block:
                break
            if self.origins[tid] not in skip_origins:
                out.append(self.blob(tid))
        tid = nxt
        while len(out) < self.max_per_block and tid < len(self.origins):
            if self.origins[tid] not in skip_origins:
                out.append(self.blob(tid))
            tid += 1
        return out

    def prune(self, store) -> None:
        self._views = {h: v for h, v in self._views.items() if h in store.states}


class EnrollPool:
    """Enrollment messages waiting for a leader to include them."""

    def __init__(self, max_per_block: int = 16):
        self.pending: list[tuple[object, int]] = []
        self.max_per_block = max_per_block
        self._done: set[int] = set()

    def submit(self, msg, origin: int) -> None:
        self.pending.append((msg, origin))

    def note_block(self, block) -> None:
        """Re-enrollments are valid repeatedly, so retire them once any block carries them."""
        for k, (msg, _) in enumerate(self.pending):
            if k not in self._done and isinstance(msg, AttestedEnrollMsg) and msg.reenroll and msg in block.enrolls:
                self._done.add(k)

    def select(self, store, tip: bytes, round_: int, skip_origins=frozenset()) -> list:
        if not self.pending:
            return []
        state = store.states[tip]
        view = EnrollView(store, state, round_)
        out = []
        for k, (msg, origin) in enumerate(self.pending):
            if len(out) >= self.max_per_block:
                break
            if k in self._done or origin in skip_origins:
                continue
            reenroll = isinstance(msg, AttestedEnrollMsg) and msg.reenroll
            if not reenroll and view.record_for_pk(msg.pk) is not None:
                continue
            if check_enrollment(view, msg, store.params):
                stage_enrollment(view, msg, round_, state.height + 1, len(out))
                out.append(msg)
        return out


def unconsumed_rewards(store, tip: bytes, pk: bytes, need: int, max_walk: int = 50_000) -> list[bytes]:
    """Up to ``need`` blocks created by ``pk`` on the branch to ``tip`` not yet spent on an enrollment."""
    consumed = store.states[tip].consumed
    out = []
    hdr = store.headers[tip]
    steps = 0
    while hdr.parent is not None and len(out) < need and steps < max_walk:
        if hdr.leader_pk == pk and hdr.block_hash not in consumed:
            out.append(hdr.block_hash)
        hdr = store.headers[hdr.parent]
        steps += 1
    out.reverse()
    return out
