from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class IdentityKind(str, Enum):
    GENESIS = "genesis"
    MINED = "mined"
    ATTESTED = "attested"


@dataclass(frozen=True)
class IdentityRecord:
    """One enrolled long-term identity as seen from a particular branch."""

    pk: bytes
    enroll_round: int
    enroll_block: bytes
    enroll_index: int
    kind: IdentityKind
    pseudonym: bytes | None = None
    last_creation_round: int | None = None
    enroll_height: int = 0

    def __post_init__(self) -> None:
        if self.last_creation_round is None:
            object.__setattr__(self, "last_creation_round", self.enroll_round)

    def with_creation(self, round_: int) -> "IdentityRecord":
        return replace(self, last_creation_round=round_)


def age(record: IdentityRecord, current_round: int) -> int:
    """Rounds since enrollment or the most recent block created by ``record``."""
    if current_round < record.last_creation_round:
        raise ValueError("current_round precedes the identity's last creation")
    return current_round - record.last_creation_round
