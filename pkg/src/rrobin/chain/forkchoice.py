"""Fork choice: most blocks first, then the divergence-point tie-break."""

from __future__ import annotations

from .store import Branch, ChainStore


class NoValidBranch(ValueError):
    pass


def branch_length(branch: Branch) -> int:
    """Rounds so far minus skipped rounds, i.e. the number of non-genesis blocks."""
    return branch.height


def divergence_prefers(store: ChainStore, a: bytes, b: bytes) -> bool:
    """True when sibling block ``b`` beats ``a`` at their common parent.

    Older leader wins. Distinct leaders of equal age fall back to enrollment
    order. The same leader on both sides compares the blocks' canonical bytes,
    and the larger encoding wins.
    """
    parent = store.states[store.headers[a].parent]
    ba, bb = store.blocks[a], store.blocks[b]
    la = parent.pk_index[ba.leader_pk]
    lb = parent.pk_index[bb.leader_pk]
    age_a = ba.round - parent.last_created[la]
    age_b = bb.round - parent.last_created[lb]
    if age_a != age_b:
        return age_b > age_a
    if la != lb:
        ra, rb = parent.registry[la], parent.registry[lb]
        return (rb.enroll_height, rb.enroll_index) < (ra.enroll_height, ra.enroll_index)
    return bb.encoded > ba.encoded


def prefer(store: ChainStore, a: bytes, b: bytes) -> bytes:
    """The better of two validated tips."""
    if a == b:
        return a
    ha, hb = store.headers[a].height, store.headers[b].height
    if ha != hb:
        return a if ha > hb else b
    fork = store.lca(a, b)
    above = store.headers[fork].height + 1
    ca, cb = store.ancestor(a, above), store.ancestor(b, above)
    return b if divergence_prefers(store, ca, cb) else a


def select_branch(branches, store: ChainStore | None = None) -> Branch:
    """Pick the best valid branch.

    Items may be ``Branch`` objects or block sequences rooted at the store's
    genesis; sequences are validated and invalid ones are discarded.
    """
    from .verify import load_branch

    valid: list[Branch] = []
    for br in branches:
        if isinstance(br, Branch):
            if br.tip in br.store.states:
                valid.append(br)
            continue
        if store is None:
            raise ValueError("block sequences need a store")
        tip, verdict = load_branch(store, br)
        if verdict:
            valid.append(Branch(store, tip))
    if not valid:
        raise NoValidBranch("no valid branch")
    st = valid[0].store
    best = valid[0].tip
    for br in valid[1:]:
        best = prefer(st, best, br.tip)
    return Branch(st, best)
