"""Deterministic discrete-event network simulation.

Events sit in one heap keyed by ``(time, kind order, sender, sequence)``.
Deliveries sort before phase ends at the same instant, so a message that
arrives exactly at a deadline still counts.
"""

from __future__ import annotations

import heapq
import random
from collections import Counter, defaultdict

from ..chain.forkchoice import prefer
from ..chain.messages import Genesis
from ..chain.store import ChainStore
from ..core.crypto import KeyPair, hash_parts
from ..core.params import ProtocolParams
from ..identity.messages import MinedEnrollMsg
from ..protocol.mempool import EnrollPool, TxPool, unconsumed_rewards
from ..protocol.node import Node
from .config import ConfigError, NetConfig
from .report import RoundOutcome, SimReport

DELIVER, SYNC, INTENT_END, CONFIRM_END, ROUND_START = range(5)


class SharedView:
    """Per-node block visibility stored as one bitmask per block hash."""

    __slots__ = ("nid", "bits", "store", "bit")

    def __init__(self, nid: int, bits: dict, store: ChainStore):
        self.nid = nid
        self.bit = 1 << nid
        self.bits = bits
        self.store = store

    def knows(self, h: bytes) -> bool:
        b = self.bits.get(h)
        if b is None:
            hdr = self.store.headers.get(h)
            return hdr is not None and (hdr.parent is None or hdr.height < self.store.pruned_below)
        return bool(b & self.bit)

    def learn(self, h: bytes) -> None:
        self.bits[h] = self.bits.get(h, 0) | self.bit


class Simulation:
    def __init__(self, params: ProtocolParams, net: NetConfig, adversary=None, spare_honest: int = 0):
        from ..adversary.strategies import Adversary, AdversaryConfig

        net.validate(params)
        self.params = params
        self.net = net
        self.adv_config = adversary if adversary is not None else AdversaryConfig()
        self.adv_config.validate()
        self.rng = random.Random(net.seed)
        self.net_rng = random.Random(self.rng.getrandbits(64))
        self.tx_rng = random.Random(self.rng.getrandbits(64))
        self.adv_rng = random.Random(self.rng.getrandbits(64))

        n = net.n
        n_adv = round(self.adv_config.alpha * n)
        adv_members = frozenset(self.rng.sample(range(n), n_adv)) if n_adv else frozenset()
        spares_adv = self.adv_config.spare_identities()
        total = n + spare_honest + spares_adv
        self.keys = [
            KeyPair.from_seed(hash_parts(b"sim-key", net.seed.to_bytes(8, "big"), i.to_bytes(4, "big")), net.key_scheme)
            for i in range(total)
        ]
        self.honest_spares = list(range(n, n + spare_honest))
        adv_spares = list(range(n + spare_honest, total))
        self.adversarial = adv_members | frozenset(adv_spares)
        genesis_seed = hash_parts(b"genesis-seed", net.seed.to_bytes(8, "big"))
        self.genesis = Genesis.make([k.pk for k in self.keys[:n]], genesis_seed, params)
        self.store = ChainStore(self.genesis)
        self.txpool = TxPool(per_round=net.txs_per_round, size=net.tx_size) if net.txs_per_round else None
        self.enrollpool = EnrollPool()
        self.bits: dict[bytes, int] = {}
        self.adversary = Adversary(self.adv_config, self, adv_members, adv_spares)
        self.nodes: list[Node] = []
        for i, k in enumerate(self.keys):
            view = SharedView(i, self.bits, self.store)
            kw = dict(txpool=self.txpool, enrollpool=self.enrollpool, view=view, name=i)
            if i in self.adversarial:
                node = self.adversary.make_node(k, self.store, **kw)
            else:
                node = Node(k, self.store, **kw)
            self.nodes.append(node)
        self.node_of_pk = {k.pk: i for i, k in enumerate(self.keys)}
        self.honest_ids = [i for i in range(total) if i not in self.adversarial]

        self.heap: list = []
        self.seq = 0
        self.now = 0
        self.round = 0
        self.sent = Counter()
        self.delivered = Counter()
        self.dropped = Counter()
        self.filtered = Counter()
        self.logical = defaultdict(int)
        self.blocks_made = defaultdict(int)
        self.round_targeted: dict[int, bool] = {}
        self.round_fork_window: dict[int, bool] = {}
        self.round_unreach: dict[int, float] = {}
        self.unreach_node: frozenset = frozenset()
        self.unreach_from: dict[int, frozenset] = {}
        self._sticky_cache = None
        self.enroll_schedule: dict[int, list] = defaultdict(list)
        self.sync_requests = 0
        self._unreach_sizes: list[int] = []

    # scheduling ----------------------------------------------------------

    def push(self, t: int, kind: int, sender: int, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, kind, sender, self.seq, payload))

    def _unreachable_count(self) -> int:
        x = self.net.beta * self.net.n
        k = int(x)
        if self.net_rng.random() < x - k:
            k += 1
        return k

    def _draw_unreachable(self, exclude: int | None) -> frozenset:
        pool = [i for i in self.honest_ids if i != exclude]
        k = min(self._unreachable_count(), len(pool))
        self._unreach_sizes.append(k)
        return frozenset(self.net_rng.sample(pool, k)) if k else frozenset()

    def _resample_beta(self, r: int) -> None:
        if self.net.beta <= 0:
            self.round_unreach[r] = 0.0
            return
        if self.net.sticky and self._sticky_cache is not None:
            self.unreach_node, self.unreach_from = self._sticky_cache
        elif self.net.beta_mode == "node":
            self.unreach_node = self._draw_unreachable(None)
            self.unreach_from = {}
        else:
            self.unreach_node = frozenset()
            self.unreach_from = {}
        if self.net.sticky and self._sticky_cache is None:
            self._sticky_cache = (self.unreach_node, self.unreach_from)
        if self.net.beta_mode == "node":
            self.round_unreach[r] = len(self.unreach_node) / self.net.n
        else:
            self.round_unreach[r] = None

    def _unreach_for_sender(self, sender: int) -> frozenset:
        got = self.unreach_from.get(sender)
        if got is None:
            got = self._draw_unreachable(sender)
            self.unreach_from[sender] = got
        return got

    def _partitioned(self, a: int, b: int) -> bool:
        for p in self.net.partitions:
            if p.start <= self.round <= p.end and p.group_of(a) != p.group_of(b):
                return True
        return False

    def send(self, sender: int, kind: str, msg, receivers, delay_ms: int = 0, beta_applies: bool = True) -> None:
        """Fan a message out to ``receivers`` through the filters and latency model."""
        groups: dict[int, list[int]] = {}
        lat = self.net.latency
        t0 = self.now + delay_ms
        filtered_set = frozenset()
        if beta_applies and self.net.beta > 0:
            if self.net.beta_mode == "node":
                if sender in self.unreach_node:
                    filtered_set = None
                else:
                    filtered_set = self.unreach_node
            elif kind == "intent":
                filtered_set = self._unreach_for_sender(sender)
        receivers = list(receivers)
        self.sent[kind] += len(receivers)
        if filtered_set is None:
            self.filtered[kind] += len(receivers)
            return
        if filtered_set or self.net.partitions:
            kept = [r for r in receivers if r not in filtered_set
                    and not (self.net.partitions and self._partitioned(sender, r))]
            self.filtered[kind] += len(receivers) - len(kept)
            receivers = kept
        if self.net.drop:
            kept = [r for r in receivers if self.net_rng.random() >= self.net.drop]
            self.dropped[kind] += len(receivers) - len(kept)
            receivers = kept
        if lat.kind == "constant":
            if receivers:
                self.push(t0 + lat.ms, DELIVER, sender, (kind, msg, receivers))
            return
        for rcv in receivers:
            t = t0 + lat.sample(self.net_rng, sender, rcv)
            groups.setdefault(t, []).append(rcv)
        for t in sorted(groups):
            self.push(t, DELIVER, sender, (kind, msg, groups[t]))

    def dispatch(self, sender: int, sends) -> None:
        everyone = range(len(self.nodes))
        for s in sends:
            self.logical[(self.round, s.kind)] += 1
            if s.kind == "block":
                self.blocks_made[s.msg.round] += 1
            if s.to is not None:
                rcv = [self.node_of_pk[s.to]] if s.to in self.node_of_pk else []
            else:
                rcv = [i for i in everyone if i != sender]
            if s.only is not None:
                rcv = [i for i in rcv if i in s.only]
            self.send(sender, s.kind, s.msg, rcv, s.delay_ms, beta_applies=True)

    # event handling ------------------------------------------------------

    def _deliver(self, sender: int, payload) -> None:
        kind, msg, receivers = payload
        self.delivered[kind] += len(receivers)
        nodes = self.nodes
        if kind == "intent":
            for rcv in receivers:
                nodes[rcv].receive_intent(msg)
        elif kind == "confirm":
            for rcv in receivers:
                nodes[rcv].receive_confirm(msg)
        elif kind == "block":
            for rcv in receivers:
                if nodes[rcv].receive_block(msg) is not None:
                    self._request_sync(rcv, sender, msg)
        elif kind == "sync":
            for rcv in receivers:
                for b in msg:
                    nodes[rcv].receive_block(b)

    def _request_sync(self, requester: int, responder: int, block) -> None:
        """Model a GetBlocks round trip: ancestors the requester lacks, oldest first."""
        self.sync_requests += 1
        self.sent["getblocks"] += 1
        if self._partitioned(requester, responder):
            self.filtered["getblocks"] += 1
            return
        self.delivered["getblocks"] += 1
        view = self.nodes[requester].view
        chain = []
        h = block.prev_hash
        while not view.knows(h) and h in self.store.blocks:
            chain.append(self.store.blocks[h])
            h = self.store.headers[h].parent
        if not chain:
            return
        chain.reverse()
        lat = self.net.latency
        t = self.now + lat.sample(self.net_rng, requester, responder) + lat.sample(self.net_rng, responder, requester)
        self.sent["sync"] += 1
        if self.net.drop and self.net_rng.random() < self.net.drop:
            self.dropped["sync"] += 1
            return
        self.push(t, DELIVER, responder, ("sync", tuple(chain) + (block,), [requester]))

    def schedule_enrollment(self, round_: int, sponsor: int, spare: int) -> None:
        """At ``round_``, have identity ``sponsor`` spend its block rewards to enroll key ``spare``.

        The enrollment is dropped silently if the sponsor has too few
        unspent rewards on the preferred branch at that time.
        """
        if spare not in self.honest_spares:
            raise ValueError(f"{spare} is not an honest spare key")

        def enroll(sim: "Simulation") -> None:
            tip = sim.reference_tip()
            cost = sim.params.identity_reward_cost
            rewards = unconsumed_rewards(sim.store, tip, sim.keys[sponsor].pk, cost)
            if len(rewards) == cost:
                msg = MinedEnrollMsg.create(sim.keys[sponsor], rewards, sim.keys[spare].pk)
                sim.enrollpool.submit(msg, sponsor)

        self.enroll_schedule[round_].append(enroll)

    def main_chain(self) -> list:
        """Blocks of the preferred honest branch, oldest first; needs an unpruned store."""
        hashes = self.store.path(self.reference_tip())
        if hashes and hashes[0] not in self.store.blocks:
            raise RuntimeError("early blocks were pruned; run with keep_blocks=0 to keep them")
        return [self.store.blocks[h] for h in hashes]

    def reference_tip(self) -> bytes:
        best = None
        for i in self.honest_ids:
            t = self.nodes[i].tip
            best = t if best is None else prefer(self.store, best, t)
        return best

    def _round_start(self, r: int) -> None:
        self.round = r
        self._resample_beta(r)
        if self.txpool is not None:
            self.txpool.generate(self.tx_rng, self.net.n)
        for enroll in self.enroll_schedule.pop(r, ()):
            enroll(self)
        ref = self.reference_tip()
        cands = self.store.candidates(ref, r)
        head = cands[0] if cands else None
        st = self.store.states[ref]
        self.round_targeted[r] = head is not None and self.adversary.targets_identity(st, head)
        # an honest head followed by an adversarial runner-up is where a same-round fork can form
        self.round_fork_window[r] = (
            len(cands) > 1
            and not self.adversary.is_member_pk(st.registry[cands[0]].pk)
            and self.adversary.is_member_pk(st.registry[cands[1]].pk)
        )
        self.adversary.on_round_start(r)
        t0 = self.now
        p = self.params
        self.push(t0 + p.intent_ms, INTENT_END, -1, r)
        self.push(t0 + p.intent_ms + p.confirm_ms, CONFIRM_END, -1, r)
        for i, node in enumerate(self.nodes):
            self.dispatch(i, node.on_round_start(r))

    def _phase_end(self, kind: int) -> None:
        for i, node in enumerate(self.nodes):
            out = node.on_intent_phase_end() if kind == INTENT_END else node.on_confirm_phase_end()
            if out:
                self.dispatch(i, out)

    def _maybe_prune(self, r: int) -> None:
        if r % 64 or not self.net.keep_blocks:
            return
        low = min(self.store.headers[n.tip].height for n in self.nodes)
        cut = low - self.net.keep_blocks
        if cut <= self.store.pruned_below:
            return
        self.store.prune(cut)
        if self.txpool is not None:
            self.txpool.prune(self.store)
        hdrs = self.store.headers
        for h in [h for h in self.bits if hdrs[h].height < cut]:
            del self.bits[h]

    def run(self, rounds: int) -> SimReport:
        if rounds < 1:
            raise ConfigError("rounds must be >= 1")
        p = self.params
        for r in range(1, rounds + 1):
            self.push((r - 1) * p.round_ms, ROUND_START, -1, r)
        while self.heap:
            t, kind, sender, _, payload = heapq.heappop(self.heap)
            self.now = t
            if kind == DELIVER:
                self._deliver(sender, payload)
            elif kind == ROUND_START:
                self._maybe_prune(payload - 1)
                self._round_start(payload)
            else:
                self._phase_end(kind)
        return self.report(rounds)

    # reporting -----------------------------------------------------------

    def side_branch_depths(self, main_tip: bytes) -> dict[int, int]:
        """Histogram of abandoned branch lengths hanging off the main chain."""
        hdrs = self.store.headers
        main = set(self.store.path(main_tip))
        main.add(self.store.genesis_hash)
        deepest: dict[bytes, int] = {}
        for h, hdr in hdrs.items():
            if h in main:
                continue
            cur = hdr
            while hdrs[cur.parent].block_hash not in main:
                cur = hdrs[cur.parent]
            root = cur.block_hash
            depth = hdr.height - cur.height + 1
            if depth > deepest.get(root, 0):
                deepest[root] = depth
        return dict(Counter(deepest.values()))

    def report(self, rounds: int) -> SimReport:
        store = self.store
        main_tip = self.reference_tip()
        main = [store.headers[h] for h in store.path(main_tip)]
        main_by_round = {hdr.round: hdr for hdr in main}
        per_round = Counter(hdr.round for h, hdr in store.headers.items() if hdr.parent is not None)
        outcomes = []
        counts: Counter = Counter()
        adv_blocks = 0
        for hdr in main:
            nid = self.node_of_pk[hdr.leader_pk]
            counts[nid] += 1
            adv_blocks += nid in self.adversarial
        targeted = targeted_skips = 0
        window = window_forks = 0
        for r in range(1, rounds + 1):
            hdr = main_by_round.get(r)
            msgs = sum(self.logical.get((r, k), 0) for k in ("intent", "confirm", "block"))
            skipped = hdr is None
            tgt = self.round_targeted.get(r, False)
            targeted += tgt
            targeted_skips += tgt and skipped
            if self.round_fork_window.get(r, False):
                window += 1
                window_forks += per_round.get(r, 0) >= 2
            outcomes.append(
                RoundOutcome(
                    round=r,
                    block=None if skipped else hdr.block_hash.hex(),
                    leader=None if skipped else str(self.node_of_pk[hdr.leader_pk]),
                    weight=0 if skipped else hdr.weight,
                    forked=per_round.get(r, 0) >= 2,
                    skipped=skipped,
                    msgs=msgs,
                    blocks_made=self.blocks_made.get(r, 0),
                    targeted=tgt,
                    unreachable=self.round_unreach.get(r) or 0.0,
                )
            )
        fork_depths = self.side_branch_depths(main_tip)
        honest_nodes = [self.nodes[i] for i in self.honest_ids]
        reorgs = [d for n in honest_nodes for d in n.stats.reorgs]
        d = self.params.confirm_depth
        kinds = sorted(set(self.sent) | set(self.delivered))
        messages = {
            k: {
                "sent": self.sent[k],
                "delivered": self.delivered[k],
                "dropped": self.dropped[k],
                "filtered": self.filtered[k],
            }
            for k in kinds
        }
        totals = {f: sum(v[f] for v in messages.values()) for f in ("sent", "delivered", "dropped", "filtered")}
        messages["total"] = totals
        skips = sum(o.skipped for o in outcomes)
        summary = {
            "rounds": rounds,
            "blocks": len(main),
            "skips": skips,
            "skip_rate": skips / rounds,
            "forked_rounds": sum(o.forked for o in outcomes),
            "fork_rate": sum(o.forked for o in outcomes) / rounds,
            "max_fork_depth": max(fork_depths, default=0),
            "max_reorg_depth": max(reorgs, default=0),
            "finality_violations": sum(1 for x in reorgs if x - 1 >= d),
            "adversary_identities": len(self.adversarial),
            "adversary_blocks": adv_blocks,
            "adversary_share": adv_blocks / len(main) if main else 0.0,
            "targeted_rounds": targeted,
            "targeted_skips": targeted_skips,
            "targeted_skip_rate": targeted_skips / targeted if targeted else 0.0,
            "fork_window_rounds": window,
            "fork_window_forks": window_forks,
            "fork_window_rate": window_forks / window if window else 0.0,
            "late_intents": sum(n.stats.late_intents for n in self.nodes),
            "late_confirms": sum(n.stats.late_confirms for n in self.nodes),
            "invalid_blocks_seen": sum(n.stats.invalid_blocks for n in self.nodes),
            "sync_requests": self.sync_requests,
            "unreachable_fraction": self.mean_unreachable(),
            "main_tip": main_tip.hex(),
        }
        summary.update(self.adversary.summary())
        return SimReport(
            rounds=outcomes,
            fork_depths=fork_depths,
            block_counts={str(k): v for k, v in sorted(counts.items())},
            skips=skips,
            messages=messages,
            adversary_events=list(self.adversary.events),
            summary=summary,
            config={
                "params": self.params.to_dict(),
                "net": self.net.to_dict(),
                "adversary": self.adv_config.to_dict(),
            },
        )

    def mean_unreachable(self) -> float:
        if not self._unreach_sizes:
            return 0.0
        return sum(self._unreach_sizes) / (len(self._unreach_sizes) * self.net.n)


def run_simulation(params: ProtocolParams, net: NetConfig, adversary=None, rounds: int = 100, **kw) -> SimReport:
    return Simulation(params, net, adversary, **kw).run(rounds)
