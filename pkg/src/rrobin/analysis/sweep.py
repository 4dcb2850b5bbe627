from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .formulas import DomainError, pr_afs, pr_alv
from .logprob import LogProb

SWEEP_COLUMNS = ("n_e", "alpha", "beta", "d", "s", "q", "pr_afs", "pr_alv_s", "recommended")


@dataclass(frozen=True)
class SweepRule:
    """How the recommended quorum is picked from a sweep.

    A quorum is feasible when both its fork and its s-round liveness
    probabilities sit at or below the thresholds. ``pick`` chooses the
    smallest or the largest feasible one.
    """

    afs_max: float = 1e-8
    alv_max: float = 1e-5
    pick: str = "smallest"
    log2_leaves: float = 80.0

    def __post_init__(self) -> None:
        if self.pick not in ("smallest", "largest"):
            raise DomainError("pick must be 'smallest' or 'largest'")
        if not (0 < self.afs_max <= 1 and 0 < self.alv_max <= 1):
            raise DomainError("thresholds must lie in (0, 1]")


@dataclass(frozen=True)
class SweepRow:
    n_e: int
    alpha: float
    beta: float
    d: int
    s: int
    q: int
    afs: LogProb
    alv_s: LogProb
    recommended: bool = False

    def as_csv(self) -> list[str]:
        return [str(self.n_e), repr(self.alpha), repr(self.beta), str(self.d), str(self.s), str(self.q),
                self.afs.sci(4), self.alv_s.sci(4), "1" if self.recommended else "0"]


def quorum_sweep(n_e: int, alpha: float, beta: float, d: int, s: int,
                 q_range=None, rule: SweepRule | None = None) -> list[SweepRow]:
    rule = rule or SweepRule()
    qs = list(range(1, n_e + 1) if q_range is None else q_range)
    if not qs:
        raise DomainError("empty quorum range")
    if s < 1:
        raise DomainError("liveness window must be >= 1 round")
    rows = []
    for q in qs:
        afs = pr_afs(n_e, q, alpha, beta, d, rule.log2_leaves)
        alv = pr_alv(n_e, q, alpha, beta) ** s
        rows.append(SweepRow(n_e, alpha, beta, d, s, q, afs, alv))
    best = recommend(rows, rule)
    if best is not None:
        rows = [r if r.q != best else SweepRow(**{**r.__dict__, "recommended": True}) for r in rows]
    return rows


def recommend(rows, rule: SweepRule | None = None) -> int | None:
    rule = rule or SweepRule()
    la, lv = math.log(rule.afs_max), math.log(rule.alv_max)
    ok = [r.q for r in rows if r.afs.log <= la and r.alv_s.log <= lv]
    if not ok:
        return None
    return min(ok) if rule.pick == "smallest" else max(ok)


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow(r.as_csv())
    return buf.getvalue()
