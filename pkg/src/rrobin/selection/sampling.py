from __future__ import annotations

import hashlib

from ..core.crypto import Tag

_SPAN = 1 << 64


class EmptyPopulation(ValueError):
    pass


def sample_indices(seed: bytes, round_: int, population_size: int, draws: int) -> list[int]:
    """Uniform draws with replacement from ``range(population_size)``.

    Each slot expands ``hash(tag || seed || round || slot || counter)`` and
    rejects values from the biased top of the 64-bit range, so every index is
    exactly equally likely.
    """
    if population_size <= 0:
        raise EmptyPopulation("no eligible endorsers")
    limit = _SPAN - (_SPAN % population_size)
    prefix = hashlib.sha256(Tag.SAMPLE + seed + round_.to_bytes(8, "big"))
    out = []
    for slot in range(draws):
        base = prefix.copy()
        base.update(slot.to_bytes(4, "big"))
        ctr = 0
        while True:
            h = base.copy()
            h.update(ctr.to_bytes(4, "big"))
            x = int.from_bytes(h.digest()[:8], "big")
            if x < limit:
                out.append(x % population_size)
                break
            ctr += 1
    return out
