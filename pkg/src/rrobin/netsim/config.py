from __future__ import annotations

from dataclasses import asdict, dataclass, field


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LatencyModel:
    """Per-message delivery delay in simulated milliseconds.

    ``kind`` is ``constant`` (uses ``ms``), ``uniform`` (``lo``..``hi``
    inclusive) or ``table`` (``table[sender][receiver]``).
    """

    kind: str = "constant"
    ms: int = 50
    lo: int = 0
    hi: int = 0
    table: tuple = ()

    def validate(self, n: int) -> None:
        if self.kind == "constant":
            if self.ms < 0:
                raise ConfigError("latency must be non-negative")
        elif self.kind == "uniform":
            if not 0 <= self.lo <= self.hi:
                raise ConfigError("uniform latency needs 0 <= lo <= hi")
        elif self.kind == "table":
            if len(self.table) < n or any(len(row) < n for row in self.table):
                raise ConfigError("latency table must be at least n x n")
        else:
            raise ConfigError(f"unknown latency kind {self.kind!r}")

    def max_ms(self) -> int:
        if self.kind == "constant":
            return self.ms
        if self.kind == "uniform":
            return self.hi
        return max(max(row) for row in self.table)

    def sample(self, rng, sender: int, receiver: int) -> int:
        if self.kind == "constant":
            return self.ms
        if self.kind == "uniform":
            return rng.randint(self.lo, self.hi)
        return self.table[sender][receiver]

    @classmethod
    def from_dict(cls, d: dict) -> "LatencyModel":
        d = dict(d)
        if "table" in d:
            d["table"] = tuple(tuple(row) for row in d["table"])
        return cls(**d)


@dataclass(frozen=True)
class Partition:
    """Between rounds ``start`` and ``end`` (inclusive) messages only flow within a group.

    Nodes not listed in any group form one extra group together.
    """

    start: int
    end: int
    groups: tuple

    def group_of(self, node: int) -> int:
        for g, members in enumerate(self.groups):
            if node in members:
                return g
        return -1

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(d["start"], d["end"], tuple(frozenset(g) for g in d["groups"]))


@dataclass(frozen=True)
class NetConfig:
    n: int = 10
    beta: float = 0.0
    beta_mode: str = "sender"
    sticky: bool = False
    latency: LatencyModel = field(default_factory=LatencyModel)
    drop: float = 0.0
    partitions: tuple = ()
    seed: int = 0
    key_scheme: str = "sim"
    txs_per_round: int = 2
    tx_size: int = 250
    keep_blocks: int = 256
    allow_timeouts: bool = False

    def validate(self, params) -> None:
        if self.n < 1:
            raise ConfigError("need at least one node")
        if not 0 <= self.beta < 1:
            raise ConfigError("beta must be in [0, 1)")
        if self.beta_mode not in ("sender", "node"):
            raise ConfigError("beta_mode must be 'sender' or 'node'")
        if not 0 <= self.drop < 1:
            raise ConfigError("drop probability must be in [0, 1)")
        if self.key_scheme not in ("sim", "ed25519"):
            raise ConfigError("key_scheme must be 'sim' or 'ed25519'")
        if self.tx_size < 12:
            raise ConfigError("tx_size must be >= 12")
        if self.keep_blocks and self.keep_blocks < 2 * params.confirm_depth:
            raise ConfigError("keep_blocks must be 0 (keep all) or cover two confirmation depths")
        self.latency.validate(self.n)
        shortest = min(params.intent_ms, params.confirm_ms, params.block_ms)
        if not self.allow_timeouts and self.latency.max_ms() >= shortest:
            raise ConfigError("latency must stay below every phase duration (set allow_timeouts to test timeouts)")
        for p in self.partitions:
            if p.start > p.end:
                raise ConfigError("partition start after end")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["partitions"] = [
            {"start": p.start, "end": p.end, "groups": [sorted(g) for g in p.groups]} for p in self.partitions
        ]
        d["latency"]["table"] = [list(r) for r in self.latency.table]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown net option(s): {sorted(unknown)}")
        if "latency" in d:
            d["latency"] = LatencyModel.from_dict(d["latency"])
        if "partitions" in d:
            d["partitions"] = tuple(Partition.from_dict(p) for p in d["partitions"])
        return cls(**d)
