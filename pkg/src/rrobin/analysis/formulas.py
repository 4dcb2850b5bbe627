"""Closed-form failure probabilities and throughput."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .logprob import LogProb, log_upper_tail


class DomainError(ValueError):
    pass


def _check_committee(n_e: int, q: int) -> None:
    if n_e < 1:
        raise DomainError("committee size must be positive")
    if not 0 <= q <= n_e:
        raise DomainError(f"quorum {q} outside [0, {n_e}]")


def _check_prob(name: str, p: float, *, open_top: bool = False) -> None:
    if not 0.0 <= p <= 1.0 or (open_top and p >= 1.0):
        raise DomainError(f"{name}={p} out of range")


def pr_bfs(n_e: int, q: int, alpha: float, beta: float) -> LogProb:
    """Chance that one sampled committee lets the adversary alone gather q slots.

    Every slot held by an adversarial identity or by an honest node cut off from
    the honest leader counts against safety.
    """
    _check_committee(n_e, q)
    _check_prob("alpha", alpha)
    _check_prob("beta", beta)
    _check_prob("alpha+beta", alpha + beta, open_top=True)
    return LogProb(log_upper_tail(n_e, q, alpha + beta))


def pr_afs(n_e: int, q: int, alpha: float, beta: float, d: int, log2_leaves: float = 80.0) -> LogProb:
    """Union bound over a seed-grinding tree: d bad committees in a row on any leaf."""
    if d < 1:
        raise DomainError("depth must be >= 1")
    if log2_leaves < 0:
        raise DomainError("leaf count must be >= 1")
    per_round = pr_bfs(n_e, q, alpha, beta).log
    return LogProb(min(0.0, d * per_round + log2_leaves * math.log(2)))


def pr_blv(n_e: int, q: int, beta: float) -> LogProb:
    """Chance that unreachable honest slots alone deny a quorum (at least n_e - q)."""
    _check_committee(n_e, q)
    _check_prob("beta", beta)
    return LogProb(log_upper_tail(n_e, n_e - q, beta))


def pr_alv(n_e: int, q: int, alpha: float, beta: float) -> LogProb:
    """As ``pr_blv`` with withheld adversarial slots added to the unreachable ones."""
    _check_committee(n_e, q)
    _check_prob("alpha", alpha)
    _check_prob("beta", beta)
    _check_prob("alpha+beta", alpha + beta)
    return LogProb(log_upper_tail(n_e, n_e - q, alpha + beta))


def pr_ae(n_e: int, n_a: int, t_a: int, alpha: float) -> LogProb:
    """Chance an honest identity is never sampled during T_a(1 - alpha) honest rounds.

    The exponent is used as a real number, without rounding to whole rounds.
    """
    if n_a <= 0 or n_e < 0:
        raise DomainError("sizes must be positive")
    if n_e >= n_a:
        raise DomainError("need n_e < n_a")
    _check_prob("alpha", alpha)
    if t_a < 0:
        raise DomainError("T_a must be >= 0")
    return LogProb(t_a * (1 - alpha) * math.log1p(-n_e / n_a))


@dataclass(frozen=True)
class Throughput:
    tps: float
    tx_fraction: float
    tx_bytes: float


def throughput(
    t_r: float,
    block_bytes: float,
    n_e: int,
    *,
    header_bytes: float = 280,
    confirm_bytes: float = 416,
    n_enroll: int = 0,
    enroll_bytes: float = 0,
    tx_bytes: float = 250,
) -> Throughput:
    """Transactions per second once header, confirms and enrollments are paid for.

    Negative remaining space clamps to zero throughput.
    """
    if t_r <= 0 or tx_bytes <= 0 or block_bytes <= 0:
        raise DomainError("round time, tx size and block size must be positive")
    if min(header_bytes, confirm_bytes, enroll_bytes, n_e, n_enroll) < 0:
        raise DomainError("sizes and counts must be non-negative")
    room = max(0.0, block_bytes - header_bytes - n_e * confirm_bytes - n_enroll * enroll_bytes)
    return Throughput(tps=room / t_r / tx_bytes, tx_fraction=room / block_bytes, tx_bytes=room)
