"""Active set, candidate and endorser selection on a branch."""

from __future__ import annotations

from dataclasses import dataclass

from .queue import candidates_at
from .sampling import sample_indices


@dataclass(frozen=True)
class ActiveSet:
    members: frozenset[bytes]
    last_confirm_height: dict
    snapshot_round: int


@dataclass(frozen=True)
class Candidate:
    pk: bytes
    age: int
    index: int


def select_active(branch, window: int | None = None) -> ActiveSet:
    """Identities whose confirmations appear in the newest ``window`` blocks."""
    st = branch.state
    window = st.params.activity_threshold if window is None else window
    floor = st.height - window
    heights = {}
    for i, h in enumerate(st.last_confirm):
        if h > floor and h >= 1:
            heights[st.registry[i].pk] = h
    return ActiveSet(frozenset(heights), heights, st.round)


def select_candidates(branch, params=None, round_: int | None = None) -> list[Candidate]:
    """Up to N_c oldest eligible identities for the round after the branch tip."""
    st = branch.state
    params = st.params if params is None else params
    r = st.round + 1 if round_ is None else round_
    return [
        Candidate(st.registry[i].pk, r - st.last_created[i], i)
        for i in candidates_at(st, r, params.n_candidates)
    ]


def endorser_population(anchor_state, round_: int, params) -> list[int]:
    """Active identities at the anchor, minus recent enrollments, sorted by pk bytes."""
    from .queue import is_eligible

    reg = anchor_state.registry
    cutoff = round_ - params.enroll_threshold
    pop = [
        i
        for i in range(len(reg))
        if is_eligible(anchor_state, i, params.activity_threshold)
        and (reg[i].enroll_height == 0 or reg[i].enroll_round <= cutoff)
    ]
    pop.sort(key=lambda i: reg[i].pk)
    return pop


def select_endorsers(branch, params=None, round_: int | None = None, seed: bytes | None = None) -> list[bytes]:
    """N_e public keys drawn with replacement for the round after the branch tip.

    Population and seed come from the block ``confirm_depth - 1`` below the
    tip, so only the stable part of the branch influences the committee.
    """
    st = branch.state
    params = st.params if params is None else params
    r = st.round + 1 if round_ is None else round_
    anchor = branch.store.anchor_state(st.block_hash, params.confirm_depth)
    pop = endorser_population(anchor, r, params)
    draws = sample_indices(anchor.seed if seed is None else seed, r, len(pop), params.n_endorsers)
    reg = anchor.registry
    return [reg[pop[k]].pk for k in draws]
