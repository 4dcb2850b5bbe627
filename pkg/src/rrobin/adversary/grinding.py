"""Bounded seed-prediction tree search.

An adversary holding several consecutive oldest candidates can choose which
of them publishes, and each choice yields a different VRF seed. Enumerating
the choices over ``depth`` rounds gives ``branching ** depth`` reachable
seeds; the search returns the schedule whose final seed scores best.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..core.crypto import KeyPair, vrf_evaluate


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class GrindResult:
    path: tuple[int, ...]
    seed: bytes
    score: float
    leaves: int


def grind_seed(
    seed: bytes,
    keys: Sequence[KeyPair],
    branching: int,
    depth: int,
    leaf_budget: int,
    score: Callable[[bytes], float],
) -> GrindResult:
    """Exhaustive search over ``branching ** depth`` seed schedules.

    At every level the choice ``j`` means candidate ``keys[j]`` publishes.
    Ties keep the lexicographically first path, so branching 1 reproduces the
    single honest schedule.
    """
    if branching < 1 or depth < 0:
        raise ValueError("branching must be >= 1 and depth >= 0")
    if branching > len(keys):
        raise ValueError("need one key per branch")
    leaves = branching**depth
    if leaves > leaf_budget:
        raise BudgetExceeded(f"{leaves} leaves exceed the budget of {leaf_budget}")
    best: GrindResult | None = None
    stack: list[tuple[bytes, tuple[int, ...]]] = [(seed, ())]
    while stack:
        s, path = stack.pop()
        if len(path) == depth:
            v = score(s)
            if best is None or v > best.score or (v == best.score and path < best.path):
                best = GrindResult(path, s, v, leaves)
            continue
        for j in reversed(range(branching)):
            stack.append((vrf_evaluate(keys[j], s).seed, path + (j,)))
    return best
