"""Age-ordered candidate queue over a branch state.

Helpers here work on the per-branch bookkeeping kept by the chain module:
``last_created``, ``last_confirm``, ``marks`` and the identity registry.
"""

from __future__ import annotations


def is_eligible(state, idx: int, window: int) -> bool:
    """Confirm recorded, or enrollment recorded, within the newest ``window`` blocks."""
    floor = state.height - window
    return state.last_confirm[idx] > floor or state.registry[idx].enroll_height > floor


def age_key(state, idx: int):
    rec = state.registry[idx]
    return (state.last_created[idx], rec.enroll_height, rec.enroll_index)


def age_order(state, window: int) -> list[int]:
    """Eligible, unmarked identities, oldest first."""
    marks = state.marks
    pool = [i for i in range(len(state.registry)) if i not in marks and is_eligible(state, i, window)]
    pool.sort(key=lambda i: age_key(state, i))
    return pool


def skip_walk(order: list[int], head_since: int, round_: int, n_candidates: int) -> tuple[int, int]:
    """Number of head-of-queue identities skipped by ``round_`` and the new head's start round.

    A head that has been oldest for ``n_candidates`` rounds without a block is
    passed over; its successor is treated as head from that round on.
    """
    skipped = 0
    since = head_since
    while skipped < len(order) and round_ - since >= n_candidates:
        skipped += 1
        since += n_candidates
    return skipped, since


def candidates_at(state, round_: int, n_candidates: int) -> list[int]:
    order = state.order
    skipped, _ = skip_walk(order, state.head_since, round_, n_candidates)
    return order[skipped : skipped + n_candidates]
