from __future__ import annotations

import math
from dataclasses import dataclass

NEG_INF = float("-inf")


@dataclass(frozen=True, order=True)
class LogProb:
    """A probability carried as its natural logarithm.

    Values as small as 1e-300 and far below survive arithmetic because nothing
    is exponentiated until ``value`` is read.
    """

    log: float

    def __post_init__(self) -> None:
        if math.isnan(self.log) or self.log > 1e-12:
            raise ValueError(f"not a log-probability: {self.log}")
        if self.log > 0:
            object.__setattr__(self, "log", 0.0)

    @classmethod
    def of(cls, p: float) -> "LogProb":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"not a probability: {p}")
        return cls(math.log(p) if p > 0 else NEG_INF)

    @property
    def value(self) -> float:
        return math.exp(self.log)

    @property
    def log10(self) -> float:
        return self.log / math.log(10) if self.log != NEG_INF else NEG_INF

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "LogProb") -> "LogProb":
        return LogProb(self.log + other.log)

    def __pow__(self, k: float) -> "LogProb":
        if k == 0:
            return LogProb(0.0)
        return LogProb(self.log * k)

    def sci(self, digits: int = 4) -> str:
        """Scientific notation that stays exact below the float range."""
        if self.log == NEG_INF:
            return "0"
        e10 = self.log10
        exp = math.floor(e10)
        mant = 10 ** (e10 - exp)
        if round(mant, digits - 1) >= 10:
            mant /= 10
            exp += 1
        return f"{mant:.{digits - 1}f}e{exp:+03d}"


def logsumexp(terms) -> float:
    terms = [t for t in terms if t != NEG_INF]
    if not terms:
        return NEG_INF
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def log_binom_pmf(n: int, k: int, p: float) -> float:
    if k < 0 or k > n:
        return NEG_INF
    if p == 0.0:
        return 0.0 if k == 0 else NEG_INF
    if p == 1.0:
        return 0.0 if k == n else NEG_INF
    coef = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return coef + k * math.log(p) + (n - k) * math.log1p(-p)


def log_upper_tail(n: int, k: int, p: float) -> float:
    """log P[X >= k] for X ~ Binomial(n, p)."""
    if k <= 0:
        return 0.0
    if k > n:
        return NEG_INF
    return min(0.0, logsumexp(log_binom_pmf(n, i, p) for i in range(k, n + 1)))
