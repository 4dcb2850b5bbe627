from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Verdict:
    """Accept, or reject with a short machine-readable reason."""

    ok: bool
    reason: str | None = None
    height: int | None = None

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def accept(cls) -> "Verdict":
        return _ACCEPT

    @classmethod
    def reject(cls, reason: str, height: int | None = None) -> "Verdict":
        return cls(False, reason, height)

    def __repr__(self) -> str:
        if self.ok:
            return "accept"
        at = "" if self.height is None else f", {self.height}"
        return f"reject({self.reason}{at})"


_ACCEPT = Verdict(True)
