"""Deterministic zero-round solvability in the port-numbering model.

A white algorithm that decides in zero rounds must pick one white
configuration and a fixed port-to-label map; adversarial wiring then realizes
every size-delta multiset over the configuration's support at some black
node.  Solvability is therefore a support-universality test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

from .bounds import LogProb
from .errors import BudgetExceededError
from .problems import BLACK, WHITE, Problem, expand, swap_sides

ORACLE_MAX_LABELS = 3
ORACLE_MAX_DELTA = 3


@dataclass
class ZeroRoundVerdict:
    side: str
    solvable: bool
    witness: tuple[tuple[str, ...], frozenset[str]] | None = None
    failing_support_witnesses: dict[frozenset[str], tuple[str, ...]] = field(
        default_factory=dict
    )


def _support_key(s: frozenset[str]):
    return (len(s), tuple(sorted(s)))


def zero_round_white(p: Problem) -> ZeroRoundVerdict:
    """Solvable iff some white configuration's support is black-universal:
    every delta-multiset over the support lies in the black constraint."""
    white_exp = sorted(expand(p.white))
    black_exp = expand(p.black)
    supports = sorted({frozenset(c) for c in white_exp}, key=_support_key)
    failures: dict[frozenset[str], tuple[str, ...]] = {}
    for support in supports:
        cached = next(
            (s for s in failures if s <= support), None
        )  # universality is monotone: a failing subset dooms every superset
        if cached is not None:
            failures[support] = failures[cached]
            continue
        bad = next(
            (
                m
                for m in combinations_with_replacement(sorted(support), p.delta)
                if m not in black_exp
            ),
            None,
        )
        if bad is None:
            witness_cfg = next(c for c in white_exp if frozenset(c) <= support)
            return ZeroRoundVerdict(
                WHITE, True, (witness_cfg, support), dict(failures)
            )
        failures[support] = bad
    return ZeroRoundVerdict(WHITE, False, None, failures)


def zero_round_black(p: Problem) -> ZeroRoundVerdict:
    verdict = zero_round_white(swap_sides(p))
    verdict.side = BLACK
    return verdict


def zero_round(p: Problem, side: str) -> ZeroRoundVerdict:
    return zero_round_white(p) if side == WHITE else zero_round_black(p)


@dataclass(frozen=True)
class RandomizedFloor:
    """Floors on the local failure probability of a randomized zero-round
    algorithm for a problem that is not deterministically solvable."""

    delta: int
    config_count: int
    pigeonhole: LogProb  # 1/(k*delta)^delta with k single white configurations
    family_floor: LogProb  # 1/delta^(2*delta)


def randomized_floor(p: Problem, side: str = WHITE) -> RandomizedFloor:
    verdict = zero_round(p, side)
    if verdict.solvable:
        raise ValueError("randomized floor is only defined for unsolvable problems")
    cons = p.white if side == WHITE else p.black
    k = len(expand(cons))
    return RandomizedFloor(
        delta=p.delta,
        config_count=k,
        pigeonhole=LogProb(p.delta * math.log2(k * p.delta)),
        family_floor=LogProb(2 * p.delta * math.log2(p.delta)),
    )


def brute_force_oracle(p: Problem) -> ZeroRoundVerdict:
    """Independent oracle: try every white configuration as the fixed
    port-to-label assignment and every combination of white ports a black
    node's edges may carry."""
    if len(p.alphabet) > ORACLE_MAX_LABELS or p.delta > ORACLE_MAX_DELTA:
        raise BudgetExceededError(
            f"oracle limited to {ORACLE_MAX_LABELS} labels and delta {ORACLE_MAX_DELTA}"
        )
    black_exp = expand(p.black)
    for assignment in sorted(expand(p.white)):
        ok = all(
            tuple(sorted(assignment[i] for i in ports)) in black_exp
            for ports in product(range(p.delta), repeat=p.delta)
        )
        if ok:
            return ZeroRoundVerdict(WHITE, True, (assignment, frozenset(assignment)))
    return ZeroRoundVerdict(WHITE, False)
