from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

CSV_COLUMNS = ("round", "leader", "weight", "forked", "skipped", "msgs")


@dataclass
class RoundOutcome:
    round: int
    block: str | None
    leader: str | None
    weight: int
    forked: bool
    skipped: bool
    msgs: int
    blocks_made: int = 0
    targeted: bool = False
    unreachable: float = 0.0


@dataclass
class SimReport:
    rounds: list[RoundOutcome]
    fork_depths: dict[int, int]
    block_counts: dict[str, int]
    skips: int
    messages: dict
    adversary_events: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        data = {
            "summary": self.summary,
            "fork_depths": {str(k): v for k, v in sorted(self.fork_depths.items())},
            "block_counts": dict(sorted(self.block_counts.items())),
            "skips": self.skips,
            "messages": self.messages,
            "adversary_events": self.adversary_events,
            "config": self.config,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for o in self.rounds:
            w.writerow((o.round, o.leader or "", o.weight, int(o.forked), int(o.skipped), o.msgs))
        return buf.getvalue()

    def rounds_as_dicts(self) -> list[dict]:
        return [asdict(o) for o in self.rounds]
