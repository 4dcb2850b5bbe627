"""Byzantine strategies as overrides of the honest node callbacks.

One ``Adversary`` coordinates every adversarial node. Its identity set is
drawn once at setup and never changes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

from ..core.crypto import vrf_evaluate
from ..identity.messages import MinedEnrollMsg
from ..protocol.mempool import unconsumed_rewards
from ..protocol.node import Node, Send
from ..selection.ops import endorser_population
from ..selection.sampling import sample_indices
from .grinding import BudgetExceeded, grind_seed

STRATEGIES = (
    "none",
    "withhold-confirm",
    "double-intent-fork",
    "equivocate",
    "enroll-burst",
    "censor",
    "grind",
)


class AdversaryConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AdversaryConfig:
    alpha: float = 0.0
    strategy: str = "none"
    start: int = 1
    end: int | None = None
    targets: tuple | None = None
    burst: int = 4
    branching: int = 2
    depth: int = 1
    leaf_budget: int = 1 << 20
    late_ms: int | None = None

    def validate(self) -> None:
        if not 0 <= self.alpha < 0.5:
            raise AdversaryConfigError("alpha must be in [0, 0.5)")
        if self.strategy not in STRATEGIES:
            raise AdversaryConfigError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if self.start < 1 or (self.end is not None and self.end < self.start):
            raise AdversaryConfigError("bad activation range")
        if self.burst < 1 or self.branching < 1 or self.depth < 1:
            raise AdversaryConfigError("burst, branching and depth must be >= 1")
        if self.strategy == "grind" and self.branching**self.depth > self.leaf_budget:
            raise BudgetExceeded("grinding tree exceeds the leaf budget")

    def active(self, r: int) -> bool:
        return self.strategy != "none" and self.start <= r and (self.end is None or r <= self.end)

    def spare_identities(self) -> int:
        return self.burst if self.strategy == "enroll-burst" else 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["targets"] = None if self.targets is None else list(self.targets)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AdversaryConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise AdversaryConfigError(f"unknown adversary option(s): {sorted(unknown)}")
        d = dict(d)
        if d.get("targets") is not None:
            d["targets"] = tuple(d["targets"])
        return cls(**d)


@dataclass(frozen=True)
class GrindPlan:
    chosen: bytes
    silent: frozenset


class Adversary:
    def __init__(self, config: AdversaryConfig, sim, members, spares):
        self.config = config
        self.sim = sim
        self._members = frozenset(members) | frozenset(spares)
        self.spares = tuple(spares)
        self.events: list[dict] = []
        self.counters: Counter = Counter()
        self.plans: dict[int, GrindPlan] = {}
        if config.targets is not None:
            self._targets = frozenset(config.targets)
        else:
            self._targets = frozenset(i for i in range(len(sim.keys)) if i not in self._members)

    @property
    def members(self) -> frozenset:
        return self._members

    @property
    def targets(self) -> frozenset:
        return self._targets

    def is_member_pk(self, pk: bytes) -> bool:
        return self.sim.node_of_pk.get(pk) in self._members

    def is_target_pk(self, pk: bytes) -> bool:
        return self.sim.node_of_pk.get(pk) in self.targets

    def targets_identity(self, state, idx: int) -> bool:
        if self.config.strategy not in ("withhold-confirm", "censor"):
            return False
        if not self.config.active(self.sim.round):
            return False
        return self.is_target_pk(state.registry[idx].pk)

    def log(self, r: int, kind: str, **info) -> None:
        self.counters[kind] += 1
        self.events.append({"round": r, "event": kind, **info})

    def make_node(self, key, store, **kw) -> "AdversaryNode":
        return AdversaryNode(key, store, coordinator=self, **kw)

    # grinding --------------------------------------------------------------

    def adversarial_slots(self, state, seed: bytes, round_: int) -> int:
        params = self.sim.params
        pop = endorser_population(state, round_, params)
        if not pop:
            return 0
        reg = state.registry
        draws = sample_indices(seed, round_, len(pop), params.n_endorsers)
        return sum(1 for k in draws if self.is_member_pk(reg[pop[k]].pk))

    def on_round_start(self, r: int) -> None:
        cfg = self.config
        if cfg.strategy != "grind" or not cfg.active(r):
            return
        store = self.sim.store
        tip = self.sim.reference_tip()
        st = store.states[tip]
        run = []
        for idx in store.candidates(tip, r):
            if not self.is_member_pk(st.registry[idx].pk):
                break
            run.append(idx)
        if len(run) < 2:
            return
        b = min(len(run), cfg.branching)
        keys = [self.sim.keys[self.sim.node_of_pk[st.registry[i].pk]] for i in run[:b]]
        target_round = r + self.sim.params.confirm_depth
        if cfg.depth == 1:
            scores = [self.adversarial_slots(st, vrf_evaluate(k, st.seed).seed, target_round) for k in keys]
            j = max(range(b), key=lambda x: (scores[x], -x))
        else:
            res = grind_seed(
                st.seed, keys, b, cfg.depth, cfg.leaf_budget, lambda s: self.adversarial_slots(st, s, target_round)
            )
            j = res.path[0]
        self.plans[r] = GrindPlan(keys[j].pk, frozenset(k.pk for k in keys[:j]))
        self.counters["grind_decisions"] += 1
        if j:
            self.log(r, "grind-reorder", skipped=j)

    def summary(self) -> dict:
        out = {"adversary_strategy": self.config.strategy}
        for k, v in sorted(self.counters.items()):
            out[f"adversary_{k.replace('-', '_')}"] = v
        return out


class AdversaryNode(Node):
    honest = False

    def __init__(self, key, store, *, coordinator: Adversary, **kw):
        super().__init__(key, store, **kw)
        self.coord = coordinator

    @property
    def strategy(self) -> str:
        cfg = self.coord.config
        return cfg.strategy if cfg.active(self.round) else "none"

    # intents -----------------------------------------------------------------

    def on_round_start(self, round_: int) -> list[Send]:
        self.round = round_
        s = self.strategy
        if s == "grind":
            plan = self.coord.plans.get(round_)
            if plan is not None and self.pk in plan.silent:
                super().on_round_start(round_)
                self.proposals = {}
                self.intents_rx = []
                return []
        out = super().on_round_start(round_)
        if s == "double-intent-fork" and out:
            first = next(iter(self.proposals.values()))
            alt = self.make_proposal(self.tip, round_, (b"fork",) + first.txs)
            self.intents_rx.append(alt.intent)
            out.append(Send("intent", alt.intent, only=self.coord.members))
            self.coord.counters["hidden_intents"] += 1
        return out

    # confirmations -----------------------------------------------------------

    def endorse(self):
        s = self.strategy
        if s == "none" or s in ("enroll-burst", "censor"):
            return super().endorse()
        by_prev = self.valid_intents()
        if not by_prev:
            return []
        if s == "withhold-confirm":
            kept = {
                p: [x for x in lst if not self.coord.is_target_pk(x[1].candidate_pk)] for p, lst in by_prev.items()
            }
            kept = {p: lst for p, lst in kept.items() if lst}
            if not kept:
                return []
            return [kept[self.best_prev(sorted(kept))][0][1]]
        prev = self.best_prev(sorted(by_prev))
        ranked = by_prev[prev]
        if s == "equivocate":
            picks, senders = [], set()
            for _, it in ranked:
                if it.candidate_pk not in senders:
                    senders.add(it.candidate_pk)
                    picks.append(it)
                if len(picks) == 2:
                    break
            return picks
        if s == "double-intent-fork":
            picks = [ranked[0][1]]
            adv = [it for _, it in ranked if self.coord.is_member_pk(it.candidate_pk)]
            if adv:
                lead = adv[0].candidate_pk
                picks += [it for it in adv if it.candidate_pk == lead and it is not picks[0]]
            return picks
        if s == "grind":
            plan = self.coord.plans.get(self.round)
            if plan is not None:
                for _, it in ranked:
                    if it.candidate_pk == plan.chosen:
                        return [it]
            return [ranked[0][1]]
        return super().endorse()

    def on_intent_phase_end(self) -> list[Send]:
        out = super().on_intent_phase_end()
        if self.strategy == "equivocate" and len(out) > 1:
            self.coord.counters["equivocations"] += 1
        return out

    # block contents ------------------------------------------------------------

    def select_confirms(self, p):
        confirms = list(p.confirms.items())
        if self.strategy != "censor":
            return [c for _, c in confirms]
        committee = self.store.committee(p.prev, self.round)
        reg = self.store.states[p.prev].registry
        total = p.weight
        kept = []
        dropped = 0
        for e, c in confirms:
            w = committee.get(e, 0)
            if self.coord.is_target_pk(reg[e].pk) and total - w >= self.params.quorum:
                total -= w
                dropped += 1
                continue
            kept.append(c)
        if dropped:
            self.coord.counters["censored_confirms"] += dropped
        return kept

    def choose_txs(self, prev: bytes) -> tuple:
        if self.strategy == "censor" and self.txpool is not None:
            return tuple(self.txpool.select(self.store, prev, skip_origins=self.coord.targets))
        return super().choose_txs(prev)

    def choose_enrolls(self, prev: bytes, round_: int) -> tuple:
        s = self.strategy
        pool = self.enrollpool
        if s == "censor" and pool is not None:
            return tuple(pool.select(self.store, prev, round_, skip_origins=self.coord.targets))
        if s == "enroll-burst":
            burst = self.burst_enrollments(prev)
            rest = tuple(pool.select(self.store, prev, round_)) if pool is not None else ()
            return tuple(burst) + tuple(m for m in rest if m.pk not in {b.pk for b in burst})
        return super().choose_enrolls(prev, round_)

    def burst_enrollments(self, prev: bytes) -> list:
        st = self.store.states[prev]
        pending = [i for i in self.coord.spares if self.coord.sim.keys[i].pk not in st.pk_index]
        if not pending:
            return []
        cost = self.params.identity_reward_cost
        rewards = unconsumed_rewards(self.store, prev, self.pk, cost * len(pending))
        out = []
        for k, i in enumerate(pending):
            chunk = rewards[k * cost : (k + 1) * cost]
            if len(chunk) < cost:
                break
            out.append(MinedEnrollMsg.create(self.key, chunk, self.coord.sim.keys[i].pk))
        if out:
            self.coord.log(self.round, "enroll-burst", count=len(out))
        return out

    # publication -----------------------------------------------------------------

    def on_confirm_phase_end(self) -> list[Send]:
        out = super().on_confirm_phase_end()
        if self.strategy == "double-intent-fork" and len(out) > 1:
            late = self.coord.config.late_ms
            late = self.params.block_ms // 2 if late is None else late
            out = [out[0]] + [Send(s.kind, s.msg, s.to, s.only, late) for s in out[1:]]
            self.coord.log(self.round, "hidden-block", blocks=len(out))
        return out
