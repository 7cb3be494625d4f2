"""Log-domain calculators for the randomized lifting bounds.

Probabilities are carried as neg_log2 values (so p = 2^-neg_log2) because
quantities like 2^-(delta^(2T+1)) are unrepresentable directly.  Integer
neg_log2 values are kept exact; math.inf is the zero-probability sentinel and
propagates through every operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_K = 11
DEFAULT_SIGMA = 5


@dataclass(frozen=True)
class LogProb:
    """A probability held as -log2(p); neg_log2 is a nonnegative int or float."""

    neg_log2: int | float

    def __post_init__(self):
        if not self.neg_log2 >= 0:
            raise ValueError(f"neg_log2 {self.neg_log2} must be nonnegative")

    @classmethod
    def from_probability(cls, p: float) -> "LogProb":
        if not 0 <= p <= 1:
            raise ValueError(f"probability {p} out of range")
        if p == 0:
            return cls(math.inf)
        return cls(-math.log2(p))

    @property
    def is_zero(self) -> bool:
        return self.neg_log2 == math.inf

    def probability(self) -> float:
        if self.is_zero:
            return 0.0
        return 2.0 ** -float(self.neg_log2)

    def root(self, m: int | float) -> "LogProb":
        """p^(1/m)."""
        if self.is_zero:
            return self
        if isinstance(self.neg_log2, int) and isinstance(m, int) and self.neg_log2 % m == 0:
            return LogProb(self.neg_log2 // m)
        return LogProb(self.neg_log2 / m)

    def scaled(self, factor_log2: float) -> "LogProb":
        """p * 2^factor_log2, clamped to a probability."""
        if self.is_zero:
            return self
        return LogProb(max(0.0, self.neg_log2 - factor_log2))

    def plus(self, other: "LogProb") -> "LogProb":
        """p + q in the log domain, clamped at one."""
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b = self.neg_log2, other.neg_log2
        lo, hi = (a, b) if a <= b else (b, a)
        diff = hi - lo
        if diff > 1074:
            return LogProb(max(0.0, float(lo)))
        return LogProb(max(0.0, lo - math.log2(1.0 + 2.0 ** -float(diff))))

    def __le__(self, other: "LogProb") -> bool:
        # larger neg_log2 means smaller probability
        return self.neg_log2 >= other.neg_log2

    def render(self) -> str:
        if self.is_zero:
            return "0"
        return f"2^-{self.neg_log2}"


def single_step(p: LogProb, delta: int, sigma_size: int) -> LogProb:
    """Failure growth across one speedup step:
    2^(1/(d+1)) * (d*sigma)^(d/(d+1)) * p^(1/(d+1)) + p, clamped at one."""
    if p.is_zero:
        return p
    factor = (1.0 + delta * math.log2(delta * sigma_size)) / (delta + 1)
    term = p.root(delta + 1).scaled(factor)
    return term.plus(p)


@dataclass(frozen=True)
class MultiStepBound:
    recursion: LogProb
    closed_form: LogProb
    steps: int


def multi_step(
    p: LogProb,
    delta: int,
    j: int,
    K: int = DEFAULT_K,
    sigma_size: int = DEFAULT_SIGMA,
) -> MultiStepBound:
    """Exact j-fold recursion of single_step plus the closed form
    (K*delta)^2 * p^(1/(d+1)^j) for display."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    value = p
    for _ in range(j):
        value = single_step(value, delta, sigma_size)
    closed = p.root((delta + 1) ** j).scaled(2 * math.log2(K * delta)) if j else p
    return MultiStepBound(recursion=value, closed_form=closed, steps=j)


def failure_floor(delta: int, T: int) -> LogProb:
    """Minimum failure probability of running faster than T rounds:
    neg_log2 is exactly delta^(2T+1)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return LogProb(delta ** (2 * T + 1))


def constant_dominates(K: int = DEFAULT_K, deltas=range(2, 65), sigma: int = DEFAULT_SIGMA) -> bool:
    """Whether 2^(1/(d+1)) (sigma*d)^(d/(d+1)) q + q <= K*d*q for q = p^(1/(d+1)),
    all p <= 1 (dividing out q leaves a p-free inequality)."""
    return all(
        2 ** (1 / (d + 1)) * (sigma * d) ** (d / (d + 1)) + 1 <= K * d for d in deltas
    )


@dataclass(frozen=True)
class LiftParams:
    """Parameter bundle for the lifting calculators."""

    delta: int
    n: int
    sigma_size: int = DEFAULT_SIGMA
    K: int = DEFAULT_K
    k: int = 1


@dataclass(frozen=True)
class RandomizedRegime:
    t: int
    threshold: float  # (1/(3k)) loglog n / logloglog n
    exempt_t_large: bool
    exempt_t_small: bool
    applies: bool
    floor: LogProb | None
    floor_at_least_inv_n: bool | None
    verdict: str


def randomized_regime(
    n: int | None, delta: int, x: int, y: int, k: int = 1, log2_n: float | None = None
) -> RandomizedRegime:
    """Whether the randomized lower bound applies for these parameters, with the
    two exemption clauses and the floor-versus-1/n comparison (logs base 2).

    Node counts beyond float range are passed as ``log2_n``."""
    from .family import t_bound

    if log2_n is None:
        if n is None or n < 16:
            raise ValueError("need n >= 16 or an explicit log2_n")
        log2_n = math.log2(n)
    if k < 1:
        raise ValueError("need k >= 1")
    t = t_bound(delta, x, y).value
    loglog = math.log2(log2_n)
    if loglog <= 1:
        raise ValueError("n too small for the loglog threshold")
    threshold = loglog / math.log2(loglog) / (3 * k)
    exempt_large = t >= threshold
    exempt_small = t <= delta ** (1 / k)
    applies = not (exempt_large or exempt_small)
    floor = failure_floor(delta, t) if t >= 1 else None
    floor_cmp = None if floor is None else floor.neg_log2 <= log2_n
    if exempt_large:
        verdict = "exempt: T too large"
    elif exempt_small:
        verdict = "exempt: T <= delta^(1/k)"
    else:
        verdict = "bound applies"
    return RandomizedRegime(
        t, threshold, exempt_large, exempt_small, applies, floor, floor_cmp, verdict
    )


@dataclass(frozen=True)
class LiftReport:
    t: int
    floor: LogProb | None
    randomized: "RandomizedRegime"
    deterministic: "DeterministicRegime"


def lift_report(params: LiftParams, x: int, y: int, log2_n: float | None = None) -> LiftReport:
    """All lifting quantities for one parameter bundle."""
    from .family import t_bound

    t = t_bound(params.delta, x, y).value
    floor = failure_floor(params.delta, t) if t >= 1 else None
    rnd = randomized_regime(params.n, params.delta, x, y, params.k, log2_n=log2_n)
    det = deterministic_regime(params.n, params.delta, x, y, params.k, log2_n=log2_n)
    return LiftReport(t, floor, rnd, det)


@dataclass(frozen=True)
class DeterministicRegime:
    t: int
    log_term: float  # (1/k) log n / log log n
    value: float  # min of the two
    exempt_t_small: bool
    verdict: str


def deterministic_regime(
    n: int | None, delta: int, x: int, y: int, k: int = 1, log2_n: float | None = None
) -> DeterministicRegime:
    """The deterministic threshold min(T, (1/k) log n / log log n) with the
    T <= delta^(1/k) exemption (logs base 2)."""
    from .family import t_bound

    if log2_n is None:
        if n is None or n < 4:
            raise ValueError("need n >= 4 or an explicit log2_n")
        log2_n = math.log2(n)
    if k < 1:
        raise ValueError("need k >= 1")
    t = t_bound(delta, x, y).value
    log_term = log2_n / math.log2(log2_n) / k
    exempt = t <= delta ** (1 / k)
    verdict = "exempt: T <= delta^(1/k)" if exempt else "bound applies"
    return DeterministicRegime(t, log_term, min(t, log_term), exempt, verdict)
