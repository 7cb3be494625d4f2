"""The matching problem family, its exact round bound, and lower-bound chains.

The chain starts from the 4-label matching encoding, passes through the
intermediate problem produced by the first speedup step, and then walks the
5-label family whose parameters follow (a, b, c) -> (a, min(c+a, delta-a), b)
per step.  ``verify_chain`` mechanizes every step; ``auto_bound`` searches for
chains with at most a fixed number of labels per step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations

from .errors import BudgetExceededError, ChainVerificationError, ProblemFormatError
from .problems import (
    BLACK,
    WHITE,
    Config,
    Problem,
    canonical_signature,
    config,
    equal_up_to_renaming,
    expand,
    make_problem,
    other_side,
    render_problem,
    swap_sides,
)
from .relax import add_configurations, relax_to_targets, set_config
from .speedup import RawStepResult, _set_key, re_black, re_white
from .zeroround import zero_round, zero_round_white


# ---------------------------------------------------------------------------
# parameters and generators


@dataclass(frozen=True)
class PhiParams:
    delta: int
    x: int
    y: int

    def __post_init__(self):
        if self.delta < 2:
            raise ProblemFormatError(f"delta {self.delta} < 2")
        if not 0 <= self.x <= self.delta:
            raise ProblemFormatError(f"x {self.x} out of range 0..{self.delta}")
        if not 1 <= self.y <= self.delta:
            raise ProblemFormatError(f"y {self.y} out of range 1..{self.delta}")


@dataclass(frozen=True)
class PsiParams:
    delta: int
    a: int
    b: int
    c: int
    side: str = WHITE

    def __post_init__(self):
        d = self.delta
        if d < 2:
            raise ProblemFormatError(f"delta {d} < 2")
        if not 1 <= self.a <= d - 1:
            raise ProblemFormatError(f"a {self.a} out of range 1..{d - 1}")
        if self.b < 0 or self.c < 0:
            raise ProblemFormatError("b and c must be nonnegative")
        if self.a + self.b > d or self.a + self.c > d:
            raise ProblemFormatError("a+b and a+c must not exceed delta")


def make_phi(pp: PhiParams) -> Problem:
    """The 4-label x-maximal y-matching encoding, white version."""
    d, x, y = pp.delta, pp.x, pp.y
    white = [
        config(("MOX", y - 1), ("M", 1), ("OX", d - y)),
        config(("PX", x), ("P", d - x)),
    ]
    black = [
        config(("MPOX", y - 1), ("M", 1), ("POX", d - y)),
        config(("OX", x), ("O", d - x)),
    ]
    return make_problem(d, white, black)


def make_phi_prime(pp: PhiParams) -> Problem:
    """The intermediate problem one step below the matching encoding."""
    d, x, y = pp.delta, pp.x, pp.y
    if y > d - 1:
        raise ProblemFormatError(f"y {y} out of range 1..{d - 1}")
    black = [
        config(("X", y - 1), ("M", 1), ("O", d - y)),
        config(("X", y), ("P", d - y)),
    ]
    white = [
        config(("MPOX", y - 1), ("MX", 1), ("POX", d - y)),
        config(("POX", x), ("OX", d - x)),
    ]
    return make_problem(d, white, black)


def make_psi(ps: PsiParams) -> Problem:
    """The 5-label family member with slack a and budgets b (same side) and c."""
    d, a, b, c = ps.delta, ps.a, ps.b, ps.c
    same = [
        config(("X", a - 1), ("M", 1), ("O", d - a)),
        config(("X", a), ("O", b), ("P", d - a - b)),
        config(("X", a), ("Z", 1), ("O", d - a - 1)),
    ]
    opposite = [
        config(("MZPOX", a - 1), ("MX", 1), ("POX", d - a)),
        config(("MZPOX", a), ("POX", c), ("OX", d - a - c)),
        config(("MZPOX", a), ("X", 1), ("POX", d - a - 1)),
    ]
    p = make_problem(d, same, opposite)
    return p if ps.side == WHITE else swap_sides(p)


# ---------------------------------------------------------------------------
# the exact bound


@dataclass(frozen=True)
class TBound:
    delta: int
    x: int
    y: int
    value: int


def _ceil(a: int, b: int) -> int:
    return -(-a // b)


def t_bound(delta: int, x: int, y: int) -> TBound:
    """Exact round count: 2*ceil((delta-x)/y), one less when the two ceilings
    coincide; zero for y = delta where everything can be matched at once."""
    PhiParams(delta, x, y)
    if y == delta:
        return TBound(delta, x, y, 0)
    k = _ceil(delta - x, y)
    k_full = _ceil(delta, y)
    value = 2 * k if k_full > k else 2 * k - 1
    return TBound(delta, x, y, value)


def chain_expected(delta: int, x: int, y: int) -> list[tuple[str, object]]:
    """The (family id, params) sequence of the lower-bound chain, truncated at
    the exact bound."""
    if y >= delta:
        raise ProblemFormatError("chains are defined for y < delta")
    T = t_bound(delta, x, y).value
    out: list[tuple[str, object]] = []
    if T >= 1:
        out.append(("phi", PhiParams(delta, x, y)))
    if T >= 2:
        out.append(("phi-prime", PhiParams(delta, x, y)))
    a, b, c, side = y, x, 0, WHITE
    while len(out) < T:
        out.append(("psi", PsiParams(delta, a, b, c, side)))
        b, c = min(c + a, delta - a), b
        side = other_side(side)
    return out


def materialize(entry: tuple[str, object]) -> Problem:
    kind, params = entry
    if kind == "phi":
        return make_phi(params)
    if kind == "phi-prime":
        return make_phi_prime(params)
    if kind == "psi":
        return make_psi(params)
    raise ProblemFormatError(f"unknown family id {kind!r}")


def chain_problems(delta: int, x: int, y: int) -> list[Problem]:
    return [materialize(e) for e in chain_expected(delta, x, y)]


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainStep:
    side: str  # which speedup function was applied
    targets: list  # set-configurations over the previous problem's alphabet
    renaming: dict  # frozenset -> new label name
    added: list[Config]  # configurations added to the existential side, post-renaming
    verified: bool


@dataclass
class Chain:
    start_side: str  # algorithm side of problems[0]
    problems: list[Problem]
    steps: list[ChainStep]
    claimed_bound: int | None
    verified: bool
    complete: bool = True
    unbounded: bool = False

    def algorithm_side(self, i: int) -> str:
        return self.start_side if i % 2 == 0 else other_side(self.start_side)


def _family_sets(labels: str) -> dict[str, frozenset[str]]:
    return {name: frozenset(name) for name in labels.split()}


def prescribed_relaxation(index: int, delta: int, x: int, y: int, entries):
    """Targets, renaming and added configurations for one chain step."""
    if index == 0:
        M, OX, POX, MPOX = map(frozenset, ("M", "OX", "POX", "MPOX"))
        targets = [
            set_config((MPOX, y - 1), (M, 1), (POX, delta - y)),
            set_config((MPOX, y), (OX, delta - y)),
        ]
        renaming = {M: "M", OX: "P", POX: "O", MPOX: "X"}
        return targets, renaming, []
    if index == 1:
        X, MX, OX, POX, MPOX = map(frozenset, ("X", "MX", "OX", "POX", "MPOX"))
        targets = [
            set_config((MPOX, y - 1), (MX, 1), (POX, delta - y)),
            set_config((MPOX, y), (POX, x), (OX, delta - y - x)),
            set_config((MPOX, y), (X, 1), (POX, delta - y - 1)),
        ]
        renaming = {X: "Z", OX: "P", POX: "O", MX: "M", MPOX: "X"}
        added = [config(("MZPOX", y), ("X", 1), ("POX", delta - y - 1))]
        return targets, renaming, added
    kind, params = entries[index]
    if kind != "psi":
        raise ChainVerificationError(f"step {index} is not a family step")
    a, c = params.a, params.c
    d_cap = min(c + a, delta - a)
    X, MX, OX, POX, MZPOX = map(frozenset, ("X", "MX", "OX", "POX", "MZPOX"))
    targets = [
        set_config((MZPOX, a - 1), (MX, 1), (POX, delta - a)),
        set_config((MZPOX, a), (POX, d_cap), (OX, delta - a - d_cap)),
        set_config((MZPOX, a), (X, 1), (POX, delta - a - 1)),
    ]
    renaming = {X: "Z", OX: "P", POX: "O", MX: "M", MZPOX: "X"}
    return targets, renaming, []


def verify_chain(delta: int, x: int, y: int) -> Chain:
    """Recompute every speedup step and prescribed relaxation of the chain and
    check each lands exactly on the expected family problem; check the tail is
    not zero-round solvable.  Reports the exact bound."""
    T = t_bound(delta, x, y).value
    entries = chain_expected(delta, x, y)
    problems = [materialize(e) for e in entries]
    if T == 0:
        start = make_phi(PhiParams(delta, x, y))
        if not zero_round_white(start).solvable:
            raise ChainVerificationError(
                "bound 0 claimed but the problem is not zero-round solvable"
            )
        return Chain(WHITE, [], [], 0, verified=True)
    steps: list[ChainStep] = []
    for i in range(T - 1):
        algo = WHITE if i % 2 == 0 else BLACK
        step_side = other_side(algo)
        r = re_black(problems[i]) if step_side == BLACK else re_white(problems[i])
        targets, renaming, added = prescribed_relaxation(i, delta, x, y, entries)
        produced = relax_to_targets(r, targets, renaming)
        if added:
            produced = add_configurations(produced, other_side(step_side), added)
        if render_problem(produced) != render_problem(problems[i + 1]):
            bijection = equal_up_to_renaming(produced, problems[i + 1])
            raise ChainVerificationError(
                f"step {i} does not reproduce the expected problem "
                f"(equal up to renaming: {bijection is not None})",
                step=i,
                details=(render_problem(produced), render_problem(problems[i + 1])),
            )
        steps.append(ChainStep(step_side, targets, renaming, added, True))
    tail_algo = WHITE if (T - 1) % 2 == 0 else BLACK
    if zero_round(problems[-1], tail_algo).solvable:
        raise ChainVerificationError("chain tail is zero-round solvable")
    return Chain(WHITE, problems, steps, T, verified=True)


# ---------------------------------------------------------------------------
# bounded automatic search


@dataclass
class SearchStrategy:
    start_algo_side: str = WHITE
    max_maps_per_step: int = 20000
    max_candidates_per_step: int = 400
    max_nodes: int = 60000
    max_pool_sets: int = 14
    time_limit: float | None = 270.0
    seed: int = 0
    cancel: object | None = None  # threading.Event-like
    progress: object | None = None  # callable(dict)


@dataclass
class _Candidate:
    problem: Problem
    targets: list
    renaming: dict
    signature: str
    labels: int
    weakness: int


_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _propose_relaxations(r: RawStepResult, max_labels: int, st: SearchStrategy, state):
    uni = r.universal_set_configs()
    used = sorted({s for cfg in uni for s in cfg}, key=_set_key)
    # every nonempty subset of the source alphabet is a potential target set;
    # unions of used sets alone miss relaxations the chains need
    alphabet = list(r.source.alphabet)
    if len(alphabet) > st.max_pool_sets:
        state["complete"] = False
        pool = list(used)
    else:
        pool = sorted(
            (
                frozenset(c)
                for k in range(1, len(alphabet) + 1)
                for c in combinations(alphabet, k)
            ),
            key=_set_key,
        )
    options = {s: [t for t in pool if s <= t] for s in used}

    total = 1
    for s in used:
        total *= len(options[s])
    maps = []
    if total <= st.max_maps_per_step:

        def walk(i, current):
            if i == len(used):
                maps.append(dict(current))
                return
            s = used[i]
            for t in options[s]:
                current[s] = t
                walk(i + 1, current)
            del current[s]

        walk(0, {})
    else:
        state["complete"] = False
        # growth-bounded slice: smallest extensions first for each set
        budget_per = max(2, int(st.max_maps_per_step ** (1 / max(1, len(used)))))
        slices = [options[s][:budget_per] for s in used]

        def walk2(i, current):
            if len(maps) >= st.max_maps_per_step:
                return
            if i == len(used):
                maps.append(dict(current))
                return
            for t in slices[i]:
                current[used[i]] = t
                walk2(i + 1, current)
            del current[used[i]]

        walk2(0, {})

    seen_targets = set()
    seen_sigs = set()
    out = []
    for phi in maps:
        target_key = frozenset(
            tuple(sorted((phi[s] for s in cfg), key=_set_key)) for cfg in uni
        )
        if target_key in seen_targets:
            continue
        seen_targets.add(target_key)
        target_sets = sorted({s for cfg in target_key for s in cfg}, key=_set_key)
        if len(target_sets) > max_labels:
            continue
        renaming = {s: _LETTERS[i] for i, s in enumerate(target_sets)}
        targets = []
        for cfg in sorted(target_key, key=lambda c: [_set_key(s) for s in c]):
            counts: dict[frozenset, int] = {}
            for s in cfg:
                counts[s] = counts.get(s, 0) + 1
            targets.append(set_config(*counts.items()))
        problem = relax_to_targets(r, targets, renaming)
        sig = canonical_signature(problem)
        if sig in seen_sigs:
            continue
        seen_sigs.add(sig)
        weakness = len(expand(problem.constraint(r.side)))
        out.append(
            _Candidate(problem, targets, renaming, sig, len(problem.alphabet), weakness)
        )
    out.sort(key=lambda c: (c.labels, -c.weakness, c.signature))
    if len(out) > st.max_candidates_per_step:
        state["complete"] = False
        out = out[: st.max_candidates_per_step]
    return out


def auto_bound(
    p: Problem, max_labels: int, max_steps: int, strategy: SearchStrategy | None = None
) -> Chain:
    """Longest chain of speedup steps, each relaxed to at most ``max_labels``
    labels, ending in a problem that is not zero-round solvable.

    Deterministic given the strategy.  On budget exhaustion the best chain so
    far is returned with ``complete`` unset; a recurring problem at the same
    parity reports an unbounded chain (fixed point)."""
    st = strategy or SearchStrategy()
    start = time.monotonic()
    state = {"nodes": 0, "complete": True, "deadline_hit": False}
    if max_labels > len(_LETTERS):
        raise BudgetExceededError(f"max_labels limited to {len(_LETTERS)}")
    if zero_round(p, st.start_algo_side).solvable:
        return Chain(st.start_algo_side, [], [], 0, verified=True)

    best = Chain(st.start_algo_side, [p], [], 1, verified=True)
    found_unbounded: list[Chain] = []

    def out_of_budget() -> bool:
        if st.cancel is not None and st.cancel.is_set():
            return True
        if state["nodes"] > st.max_nodes:
            return True
        if st.time_limit is not None and time.monotonic() - start > st.time_limit:
            state["deadline_hit"] = True
            return True
        return False

    def snapshot(problems, steps) -> Chain:
        return Chain(
            st.start_algo_side,
            list(problems),
            list(steps),
            len(problems),
            verified=True,
        )

    def rec(problem, algo, problems, steps, sigs_on_path):
        nonlocal best
        if found_unbounded:
            return
        if len(problems) > len(best.problems):
            best = snapshot(problems, steps)
        if st.progress is not None:
            st.progress(
                {"nodes": state["nodes"], "depth": len(steps), "best": len(best.problems)}
            )
        if len(steps) == max_steps:
            return
        if len(best.problems) == max_steps + 1:
            return  # nothing longer is possible
        if out_of_budget():
            state["complete"] = False
            return
        step_side = other_side(algo)
        try:
            r = re_black(problem) if step_side == BLACK else re_white(problem)
        except BudgetExceededError:
            state["complete"] = False
            return
        for cand in _propose_relaxations(r, max_labels, st, state):
            state["nodes"] += 1
            if out_of_budget():
                state["complete"] = False
                return
            next_algo = other_side(algo)
            key = (cand.signature, next_algo)
            if key in sigs_on_path:
                chain = snapshot(problems, steps)
                chain.claimed_bound = None
                chain.unbounded = True
                found_unbounded.append(chain)
                return
            if zero_round(cand.problem, next_algo).solvable:
                continue
            step = ChainStep(step_side, cand.targets, cand.renaming, [], True)
            rec(
                cand.problem,
                next_algo,
                problems + [cand.problem],
                steps + [step],
                sigs_on_path | {key},
            )
            if found_unbounded or len(best.problems) == max_steps + 1:
                return

    root_key = (canonical_signature(p), st.start_algo_side)
    rec(p, st.start_algo_side, [p], [], {root_key})
    if found_unbounded:
        return found_unbounded[0]
    best.complete = state["complete"]
    return best
