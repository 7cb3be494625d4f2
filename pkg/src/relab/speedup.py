"""One-round speedup steps over sets of labels.

The black-side step builds the new black constraint by the universal
quantifier over the source black constraint (keeping only maximal
configurations) and the new white constraint by label-to-disjunction
substitution, restricted to the sets that survived the universal step.  The
white-side step is the exact dual.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceededError
from .problems import (
    BLACK,
    WHITE,
    Config,
    Problem,
    expand,
    make_problem,
    other_side,
    strength_pairs,
    swap_sides,
)

MAX_STEP_DELTA = 10
MAX_STEP_ALPHABET = 6
UNIVERSAL_BUDGET = 5_000_000


@dataclass
class RawStepResult:
    """A speedup step before any relaxation or renaming.

    ``provenance`` maps each label of ``result`` to the member set it stands
    for, drawn from the source alphabet.
    """

    source: Problem
    side: str
    result: Problem
    provenance: dict[str, frozenset[str]]

    @property
    def universal_side(self) -> str:
        return self.side

    @property
    def existential_side(self) -> str:
        return other_side(self.side)

    def universal_set_configs(self) -> list[tuple[frozenset[str], ...]]:
        """Universal-side configurations as sorted tuples of member sets."""
        out = []
        for cfg in self.result.constraint(self.side).configs:
            sets: list[frozenset[str]] = []
            for group, mult in cfg.terms:
                sets.extend([self.provenance[group[0]]] * mult)
            out.append(tuple(sorted(sets, key=_set_key)))
        return out


def _set_key(s: frozenset[str]):
    return (len(s), tuple(sorted(s)))


def name_sets(sets, source_alphabet) -> dict[frozenset[str], str]:
    """Deterministic label names for member sets.

    With a single-character source alphabet the name is the concatenation of
    the sorted members (so {A,B} becomes AB); otherwise members are joined
    with underscores, with numeric suffixes on collision.
    """
    single = all(len(lab) == 1 for lab in source_alphabet)
    names: dict[frozenset[str], str] = {}
    taken: set[str] = set()
    for s in sorted(sets, key=_set_key):
        base = ("" if single else "_").join(sorted(s))
        name, n = base, 1
        while name in taken:
            n += 1
            name = f"{base}_{n}"
        names[s] = name
        taken.add(name)
    return names


def _upward_closed_sets(labels, relation):
    """Nonempty subsets closed under 'at least as strong' on the given side.

    Every set of a maximal universal configuration is closed this way, which
    is what keeps the enumeration feasible.
    """
    stronger = {
        K: {L for L in labels if (K, L) in relation} for K in labels
    }
    out = []
    n = len(labels)
    for mask in range(1, 1 << n):
        members = frozenset(labels[i] for i in range(n) if mask >> i & 1)
        if all(stronger[K] <= members for K in members):
            out.append(members)
    out.sort(key=_set_key)
    return out


def _vec(single, index):
    v = [0] * len(index)
    for lab in single:
        v[index[lab]] += 1
    return tuple(v)


def _down_levels(vectors, delta, nlab):
    levels = [set() for _ in range(delta + 1)]
    levels[delta] = set(vectors)
    for k in range(delta, 0, -1):
        for v in levels[k]:
            for i in range(nlab):
                if v[i]:
                    levels[k - 1].add(v[:i] + (v[i] - 1,) + v[i + 1 :])
    return levels


def _reachable(cfg_sets, index, nlab):
    """All final count vectors obtainable by one choice per set."""
    states = {(0,) * nlab}
    for F in cfg_sets:
        nxt = set()
        for v in states:
            for lab in F:
                i = index[lab]
                nxt.add(v[:i] + (v[i] + 1,) + v[i + 1 :])
        states = nxt
    return states


def _is_universal(cfg_sets, allowed_vecs, index, nlab):
    return _reachable(cfg_sets, index, nlab) <= allowed_vecs


def _single_additions(cfg, alphabet):
    seen = set()
    for i, F in enumerate(cfg):
        if F in seen:
            continue
        seen.add(F)
        for lab in alphabet:
            if lab not in F:
                yield cfg[:i] + (F | {lab},) + cfg[i + 1 :]


def _universal_maximal(p: Problem, side: str, budget: int):
    labels = list(p.alphabet)
    index = {lab: i for i, lab in enumerate(labels)}
    nlab = len(labels)
    exp = expand(p.constraint(side))
    allowed = {_vec(s, index) for s in exp}
    relation = strength_pairs(exp, labels)
    candidates = _upward_closed_sets(tuple(labels), relation)
    down = _down_levels(allowed, p.delta, nlab)

    results: list[tuple[frozenset[str], ...]] = []
    nodes = 0

    def dfs(start, k, state, stack):
        nonlocal nodes
        if k == p.delta:
            results.append(tuple(stack))
            return
        for ci in range(start, len(candidates)):
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(
                    f"universal-step enumeration budget {budget} exceeded"
                )
            F = candidates[ci]
            nxt = set()
            ok = True
            for v in state:
                for lab in F:
                    i = index[lab]
                    u = v[:i] + (v[i] + 1,) + v[i + 1 :]
                    if u not in down[k + 1]:
                        ok = False
                        break
                    nxt.add(u)
                if not ok:
                    break
            if ok:
                stack.append(F)
                dfs(ci, k + 1, nxt, stack)
                stack.pop()

    dfs(0, 0, {(0,) * nlab}, [])
    maximal = [
        cfg
        for cfg in results
        if not any(
            _is_universal(bigger, allowed, index, nlab)
            for bigger in _single_additions(cfg, labels)
        )
    ]
    return maximal


def substituted_configs(
    source_configs, target_sets, names: dict[frozenset[str], str]
) -> list[Config]:
    """Rewrite label configurations over the given sets: each label becomes the
    disjunction of all sets containing it.  Configurations with an empty
    disjunction at some slot generate nothing and are dropped."""
    out = []
    for cfg in source_configs:
        terms = []
        dead = False
        for group, mult in cfg.terms:
            members = set(group)
            disj = tuple(sorted(names[S] for S in target_sets if S & members))
            if not disj:
                dead = True
                break
            terms.append((disj, mult))
        if not dead:
            out.append(Config(tuple(terms)))
    return out


def re_black(
    p: Problem,
    max_delta: int = MAX_STEP_DELTA,
    max_alphabet: int = MAX_STEP_ALPHABET,
    budget: int = UNIVERSAL_BUDGET,
) -> RawStepResult:
    """The black-side speedup step with maximality pruning and unused-set removal."""
    if p.delta > max_delta:
        raise BudgetExceededError(f"delta {p.delta} exceeds step limit {max_delta}")
    if len(p.alphabet) > max_alphabet:
        raise BudgetExceededError(
            f"alphabet size {len(p.alphabet)} exceeds step limit {max_alphabet}"
        )
    universal = _universal_maximal(p, BLACK, budget)
    used = sorted({F for cfg in universal for F in cfg}, key=_set_key)
    names = name_sets(used, p.alphabet)

    black_cfgs = []
    for cfg in universal:
        counts: dict[frozenset[str], int] = {}
        for F in cfg:
            counts[F] = counts.get(F, 0) + 1
        black_cfgs.append(
            Config(tuple(((names[F],), m) for F, m in counts.items()))
        )
    white_cfgs = substituted_configs(p.white.configs, used, names)
    result = make_problem(p.delta, white_cfgs, black_cfgs)
    return RawStepResult(
        source=p, side=BLACK, result=result, provenance={names[F]: F for F in used}
    )


def re_white(p: Problem, **kwargs) -> RawStepResult:
    """The white-side step: the black-side step with the roles reversed."""
    dual = re_black(swap_sides(p), **kwargs)
    return RawStepResult(
        source=p,
        side=WHITE,
        result=swap_sides(dual.result),
        provenance=dual.provenance,
    )


def render_step_result(r: RawStepResult) -> str:
    """Problem-file text plus a `sets:` provenance section naming each label's
    member list in the source alphabet."""
    from .problems import render_problem

    lines = [render_problem(r.result).rstrip("\n"), "sets:"]
    for name in r.result.alphabet:
        lines.append(f"{name} = {' '.join(sorted(r.provenance[name]))}")
    return "\n".join(lines) + "\n"


def parse_step_result(text: str) -> tuple[Problem, dict[str, frozenset[str]]]:
    """Split the `sets:` section off and parse both parts."""
    from .problems import parse_problem

    head, sep, tail = text.partition("sets:")
    if not sep:
        raise ValueError("missing 'sets:' provenance section")
    provenance: dict[str, frozenset[str]] = {}
    for line in tail.splitlines():
        line = line.strip()
        if not line:
            continue
        name, _, members = line.partition("=")
        provenance[name.strip()] = frozenset(members.split())
    return parse_problem(head), provenance


def is_maximal(cfg_sets, p: Problem, side: str) -> bool:
    """Whether no single label can be added to any single set without breaking
    the universal check.  Pre: ``cfg_sets`` passes the universal check."""
    labels = list(p.alphabet)
    index = {lab: i for i, lab in enumerate(labels)}
    allowed = {_vec(s, index) for s in expand(p.constraint(side))}
    cfg = tuple(sorted((frozenset(F) for F in cfg_sets), key=_set_key))
    if not _is_universal(cfg, allowed, index, len(labels)):
        raise ValueError("configuration fails the universal check")
    return not any(
        _is_universal(bigger, allowed, index, len(labels))
        for bigger in _single_additions(cfg, labels)
    )
