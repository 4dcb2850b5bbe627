"""Priority-selection baseline where the adversary may steer its own future selection.

Each round every stake unit draws a priority; the holder of the top priority
creates the block and mints one new unit. When the adversary holds the top
``choice_window`` priorities (consecutively from the top), each of those
candidates would produce a different seed and the adversary publishes the one
whose next round looks best for it. This is the comparison baseline, not the
age-ordered protocol.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = ("total_stake", "adv_stake_share", "adv_block_share")


@dataclass(frozen=True)
class BiasPoint:
    total_stake: int
    adv_stake_share: float
    adv_block_share: float


def _top_run(rng, share: float, cap: int | None) -> int:
    """How many of the highest priorities, from the top, the adversary holds."""
    n = 0
    while (cap is None or n < cap) and rng.random() < share:
        n += 1
    return n


def simulate_bias_baseline(
    alpha: float,
    initial_stake: int = 1000,
    final_stake: int = 10000,
    rng=None,
    *,
    choice_window: int | None = 2,
    exploit: bool = True,
    window: int = 1000,
    every: int = 100,
) -> list[BiasPoint]:
    """Trajectory sampled every ``every`` minted units.

    ``adv_block_share`` is the adversary's share of the last ``window`` blocks.
    With ``exploit`` false the adversary never uses its choice (fair control).
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must be in [0, 1)")
    if final_stake <= initial_stake:
        raise ValueError("final_stake must exceed initial_stake")
    rng = rng if rng is not None else np.random.default_rng()
    adv = alpha * initial_stake
    total = initial_stake
    wins: list[int] = []
    run = _top_run(rng, adv / total, choice_window)
    out: list[BiasPoint] = []
    while total < final_stake:
        won = run >= 1
        wins.append(won)
        adv += won
        total += 1
        share = adv / total
        if won and run >= 2 and exploit:
            run = max(_top_run(rng, share, choice_window) for _ in range(run))
        else:
            run = _top_run(rng, share, choice_window)
        if (total - initial_stake) % every == 0:
            tail = wins[-window:]
            out.append(BiasPoint(total, share, sum(tail) / len(tail)))
    return out


def block_rate(alpha: float, blocks: int, rng, *, choice_window: int | None = 2, exploit: bool = True, initial_stake: int = 1000) -> float:
    """Adversary share of the first ``blocks`` blocks."""
    traj = simulate_bias_baseline(
        alpha, initial_stake, initial_stake + blocks, rng, choice_window=choice_window, exploit=exploit, window=blocks, every=blocks
    )
    return traj[-1].adv_block_share


def trajectory_csv(points: list[BiasPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow((p.total_stake, f"{p.adv_stake_share:.6f}", f"{p.adv_block_share:.6f}"))
    return buf.getvalue()
