from __future__ import annotations

from dataclasses import asdict, dataclass, fields


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    """Every tunable protocol constant.

    Durations are simulated milliseconds. The three phase durations must add
    up to ``round_ms``.
    """

    n_candidates: int = 5
    n_endorsers: int = 100
    quorum: int = 54
    activity_threshold: int = 20_000
    enroll_threshold: int = 100
    confirm_depth: int = 12
    round_ms: int = 5_000
    identity_reward_cost: int = 1
    intent_ms: int = 500
    confirm_ms: int = 500
    block_ms: int = 4_000

    def __post_init__(self) -> None:
        if self.n_candidates < 1:
            raise ParamError("n_candidates must be >= 1")
        if not 0 < self.quorum <= self.n_endorsers:
            raise ParamError("need 0 < quorum <= n_endorsers")
        if self.confirm_depth < 1:
            raise ParamError("confirm_depth must be >= 1")
        if self.enroll_threshold >= self.activity_threshold:
            raise ParamError("enroll_threshold must be < activity_threshold")
        if self.identity_reward_cost < 1:
            raise ParamError("identity_reward_cost must be >= 1")
        if min(self.intent_ms, self.confirm_ms, self.block_ms) <= 0:
            raise ParamError("phase durations must be positive")
        if self.intent_ms + self.confirm_ms + self.block_ms != self.round_ms:
            raise ParamError("phase durations must sum to round_ms")

    def replace(self, **changes) -> "ProtocolParams":
        data = asdict(self)
        data.update(changes)
        if "round_ms" in changes and not {"intent_ms", "confirm_ms", "block_ms"} & changes.keys():
            # keep the default 10/10/80 split when only the round length moves
            r = changes["round_ms"]
            data["intent_ms"] = r // 10
            data["confirm_ms"] = r // 10
            data["block_ms"] = r - 2 * (r // 10)
        return ProtocolParams(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParamError(f"unknown protocol parameter(s): {sorted(unknown)}")
        return cls(**data)
