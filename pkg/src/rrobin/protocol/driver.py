"""Lock-step execution of rounds with instant, lossless delivery.

Handy for tests and for producing reference chains; the network simulator
adds latency, loss and adversaries on top of the same node callbacks.
"""

from __future__ import annotations

import random

from ..chain.messages import Genesis
from ..chain.store import ChainStore
from ..core.crypto import KeyPair
from ..core.params import ProtocolParams
from .mempool import TxPool
from .node import Node


class LockstepNetwork:
    def __init__(self, nodes: list[Node]):
        self.nodes = nodes
        self.by_pk = {n.pk: n for n in nodes}
        self.round = 0
        self.counts = {"intent": 0, "confirm": 0, "block": 0}

    def run_round(self) -> list:
        self.round += 1
        r = self.round
        sent = [(src, s) for src in self.nodes for s in src.on_round_start(r)]
        for src, s in sent:
            for n in self.nodes:
                if n is not src:
                    n.receive_intent(s.msg)
        self.counts["intent"] += len(sent)
        confirms = [s for n in self.nodes for s in n.on_intent_phase_end()]
        for s in confirms:
            target = self.by_pk.get(s.to)
            if target is not None:
                target.receive_confirm(s.msg)
        self.counts["confirm"] += len(confirms)
        blocks = [s.msg for n in self.nodes for s in n.on_confirm_phase_end()]
        for b in blocks:
            for n in self.nodes:
                n.receive_block(b)
        self.counts["block"] += len(blocks)
        return blocks

    def run(self, rounds: int) -> None:
        for _ in range(rounds):
            self.run_round()


def honest_network(
    n: int,
    params: ProtocolParams | None = None,
    seed: int = 0,
    scheme: str = "sim",
    txs_per_round: int = 0,
    tx_size: int = 250,
) -> tuple[LockstepNetwork, ChainStore, list[KeyPair]]:
    """``n`` honest genesis identities sharing one store."""
    params = params or ProtocolParams()
    rng = random.Random(seed)
    keys = [KeyPair.from_seed(rng.randbytes(32), scheme) for _ in range(n)]
    genesis = Genesis.make([k.pk for k in keys], rng.randbytes(32), params)
    store = ChainStore(genesis)
    pool = TxPool(per_round=txs_per_round, size=tx_size) if txs_per_round else None
    nodes = [Node(k, store, txpool=pool, name=i) for i, k in enumerate(keys)]
    net = LockstepNetwork(nodes)
    if pool is not None:
        base = net.run_round

        def run_round():
            pool.generate(rng, n)
            return base()

        net.run_round = run_round
    return net, store, keys
