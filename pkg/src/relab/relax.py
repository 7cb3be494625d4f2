"""Label strength, diagrams, and the certified relaxation operations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    BudgetExceededError,
    ProblemFormatError,
    UnjustifiedRelaxationError,
    UnsoundRelaxationError,
)
from .problems import (
    BLACK,
    EXPAND_CAP,
    WHITE,
    Config,
    Problem,
    expand,
    make_problem,
    other_side,
    strength_pairs,
)
from .speedup import RawStepResult, name_sets, substituted_configs, _set_key


@dataclass(frozen=True)
class StrengthPreorder:
    """The 'at least as strong' relation on labels for one side's constraint.

    ``relation`` holds pairs (K, L) meaning L is at least as strong as K.  An
    inexact preorder (computed group-wise when expansion is over budget) may
    under-approximate the relation but never over-approximates it.
    """

    side: str
    labels: tuple[str, ...]
    relation: frozenset[tuple[str, str]]
    exact: bool = True

    def at_least_as_strong(self, l: str, k: str) -> bool:
        return (k, l) in self.relation

    def equally_strong(self, k: str, l: str) -> bool:
        return (k, l) in self.relation and (l, k) in self.relation

    def stronger(self, l: str, k: str) -> bool:
        return (k, l) in self.relation and (l, k) not in self.relation


def _conservative_pairs(p: Problem, side: str) -> frozenset[tuple[str, str]]:
    # sound under-approximation: L replaces K wherever K occurs iff every
    # group mentioning K also offers L
    rel = set()
    cfgs = p.constraint(side).configs
    for K in p.alphabet:
        for L in p.alphabet:
            if K == L or all(
                L in g for c in cfgs for g, _ in c.terms if K in g
            ):
                rel.add((K, L))
    return frozenset(rel)


def strength_order(p: Problem, side: str, cap: int = EXPAND_CAP) -> StrengthPreorder:
    """The definitional replacement preorder on the expanded constraint."""
    try:
        exp = expand(p.constraint(side), cap)
    except BudgetExceededError:
        return StrengthPreorder(
            side, p.alphabet, _conservative_pairs(p, side), exact=False
        )
    return StrengthPreorder(side, p.alphabet, strength_pairs(exp, p.alphabet))


@dataclass(frozen=True)
class Diagram:
    side: str
    arrows: frozenset[tuple[str, str]]


def diagram(p: Problem, side: str) -> Diagram:
    """Arrow (K, L) iff K and L are equally strong, or L is stronger than K
    with no strictly intermediate label."""
    order = strength_order(p, side)
    labs = p.alphabet
    arrows = set()
    for K in labs:
        for L in labs:
            if K == L:
                continue
            if order.equally_strong(K, L):
                arrows.add((K, L))
            elif order.stronger(L, K) and not any(
                order.stronger(M, K) and order.stronger(L, M)
                for M in labs
                if M not in (K, L)
            ):
                arrows.add((K, L))
    return Diagram(side, frozenset(arrows))


def render_diagram(d: Diagram) -> str:
    return "\n".join(f"{k} -> {l}" for k, l in sorted(d.arrows)) + (
        "\n" if d.arrows else ""
    )


@dataclass(frozen=True)
class RelaxationMap:
    """A label map together with the side it rewrites and its justification."""

    assignment: tuple[tuple[str, str], ...]
    side: str
    justification: str = "merge"

    def mapping(self) -> dict[str, str]:
        return dict(self.assignment)


def relaxation_map(assignment: dict[str, str], side: str, justification: str = "merge"):
    return RelaxationMap(tuple(sorted(assignment.items())), side, justification)


def merge_labels(p: Problem, m: RelaxationMap) -> Problem:
    """Rewrite one side by the map; each target must be at least as strong as
    its source according to the opposite side.  Dead labels are pruned."""
    mapping = m.mapping()
    opposite = strength_order(p, other_side(m.side))
    for k, l in mapping.items():
        if k not in p.alphabet or l not in p.alphabet:
            raise ProblemFormatError(f"merge uses labels outside the alphabet: {k}->{l}")
        if k != l and not opposite.at_least_as_strong(l, k):
            raise UnjustifiedRelaxationError(
                f"{l} is not at least as strong as {k} "
                f"according to the {opposite.side} constraint"
            )
    rewritten = p.constraint(m.side).rename(mapping)
    if m.side == WHITE:
        out = make_problem(p.delta, rewritten.configs, p.black.configs)
    else:
        out = make_problem(p.delta, p.white.configs, rewritten.configs)
    return prune_dead_labels(out)


def replace_everywhere(p: Problem, k: str, l: str) -> Problem:
    """Replace k by l in both constraints; always a relaxation."""
    if k not in p.alphabet or l not in p.alphabet:
        raise ProblemFormatError(f"labels {k!r}, {l!r} must be in the alphabet")
    mapping = {k: l}
    return make_problem(
        p.delta, p.white.rename(mapping).configs, p.black.rename(mapping).configs
    )


def prune_dead_labels(p: Problem) -> Problem:
    """Remove labels unusable on any edge (absent from one side) from the
    other side's groups; drop configurations that lose a whole group.
    Preserves the solution set exactly."""
    white = list(p.white.configs)
    black = list(p.black.configs)
    while True:
        alive = frozenset(l for c in white for l in c.support) & frozenset(
            l for c in black for l in c.support
        )

        def filtered(cfgs):
            out = []
            for c in cfgs:
                terms = []
                for g, mult in c.terms:
                    g2 = tuple(l for l in g if l in alive)
                    if not g2:
                        terms = None
                        break
                    terms.append((g2, mult))
                if terms is not None:
                    out.append(Config(tuple(terms)))
            return out

        new_white, new_black = filtered(white), filtered(black)
        if new_white == white and new_black == black:
            break
        white, black = new_white, new_black
    return make_problem(p.delta, white, black)


def add_configurations(p: Problem, side: str, cfgs) -> Problem:
    """Union extra configurations into one side; always a relaxation."""
    cfgs = tuple(cfgs)
    for c in cfgs:
        if c.delta != p.delta:
            raise ProblemFormatError(f"exponent sum {c.delta} != delta {p.delta}")
        if not c.support <= set(p.alphabet):
            raise ProblemFormatError("added configuration uses labels outside the alphabet")
    if side == WHITE:
        return make_problem(p.delta, p.white.configs + cfgs, p.black.configs)
    return make_problem(p.delta, p.white.configs, p.black.configs + cfgs)


# ---------------------------------------------------------------------------
# target relaxation of a speedup step

SetConfig = tuple[tuple[frozenset[str], int], ...]


def set_config(*terms) -> SetConfig:
    """Canonical set-configuration from (members, multiplicity) pairs."""
    merged: dict[frozenset[str], int] = {}
    for members, mult in terms:
        if mult == 0:
            continue
        if mult < 0:
            raise ProblemFormatError(f"multiplicity {mult} must be positive")
        s = frozenset(members)
        if not s:
            raise ProblemFormatError("empty set label")
        merged[s] = merged.get(s, 0) + mult
    return tuple(sorted(merged.items(), key=lambda kv: _set_key(kv[0])))


def _set_config_slots(t: SetConfig) -> list[frozenset[str]]:
    return [s for s, m in t for _ in range(m)]


def _embeds(cfg_sets, target_slots) -> bool:
    """Componentwise set-inclusion of cfg_sets into a permutation of target_slots."""
    order = sorted(cfg_sets, key=lambda s: -len(s))
    used = [False] * len(target_slots)

    def place(i: int) -> bool:
        if i == len(order):
            return True
        for j, slot in enumerate(target_slots):
            if not used[j] and order[i] <= slot:
                used[j] = True
                if place(i + 1):
                    used[j] = False
                    return True
                used[j] = False
        return False

    return place(0)


def relax_to_targets(
    r: RawStepResult, targets, renaming: dict | None = None
) -> Problem:
    """Replace the universal side of a speedup step by the given target
    set-configurations and recompute the existential side by substitution.

    Every universal configuration must extend (componentwise set inclusion
    into matching slots) into some target; otherwise the proposed relaxation
    is unsound and the offending configuration is reported.
    """
    delta = r.result.delta
    targets = [set_config(*t) for t in targets]
    src_alpha = set(r.source.alphabet)
    for t in targets:
        if sum(m for _, m in t) != delta:
            raise ProblemFormatError("target multiplicities must sum to delta")
        for s, _ in t:
            if not s <= src_alpha:
                raise ProblemFormatError(
                    "target set uses labels outside the source alphabet"
                )
    target_slots = [_set_config_slots(t) for t in targets]
    for cfg_sets in r.universal_set_configs():
        if not any(_embeds(cfg_sets, slots) for slots in target_slots):
            raise UnsoundRelaxationError(
                "universal configuration does not extend into any target",
                witness=cfg_sets,
            )
    used = sorted({s for t in targets for s, _ in t}, key=_set_key)
    if renaming is None:
        names = name_sets(used, r.source.alphabet)
    else:
        names = {frozenset(k): v for k, v in renaming.items()}
        missing = [s for s in used if s not in names]
        if missing:
            raise ProblemFormatError(
                f"renaming misses used set {sorted(missing[0])}"
            )
        if len({names[s] for s in used}) != len(used):
            raise ProblemFormatError("renaming is not injective on used sets")
    universal_cfgs = [
        Config(tuple(((names[s],), m) for s, m in t)) for t in targets
    ]
    existential_cfgs = substituted_configs(
        r.source.constraint(r.existential_side).configs, used, names
    )
    if r.side == BLACK:
        return make_problem(delta, existential_cfgs, universal_cfgs)
    return make_problem(delta, universal_cfgs, existential_cfgs)


# ---------------------------------------------------------------------------
# sample-based relaxation checking


@dataclass
class RelaxationCheck:
    ok: bool
    counterexamples: list = field(default_factory=list)


def _side_words(graph, labels, side):
    """Per-node label multisets for one side of a port-numbered graph."""
    if side == WHITE:
        return [
            tuple(sorted(labels[w][i] for i in range(len(ports))))
            for w, ports in enumerate(graph.white_ports)
        ]
    words = []
    for b, ports in enumerate(graph.black_ports):
        words.append(tuple(sorted(labels[w][i] for w, i in ports)))
    return words


def check_relaxation_on_samples(
    p: Problem, q: Problem, m: RelaxationMap, samples
) -> RelaxationCheck:
    """Property-test a claimed relaxation: applying the map edge-wise to valid
    outputs of p must yield valid outputs of q on every sample."""
    from .problems import contains  # local to keep the namespace tight

    mapping = m.mapping()
    failures = []
    for idx, (graph, labels) in enumerate(samples):
        for side in (WHITE, BLACK):
            for node, word in enumerate(_side_words(graph, labels, side)):
                if not contains(p.constraint(side), word):
                    raise ProblemFormatError(
                        f"sample {idx} is not a valid output of the source problem "
                        f"({side} node {node}: {' '.join(word)})"
                    )
        relabeled = [
            [mapping.get(l, l) for l in row] for row in labels
        ]
        for side in (WHITE, BLACK):
            for node, word in enumerate(_side_words(graph, relabeled, side)):
                if not contains(q.constraint(side), word):
                    if side == WHITE:
                        edges = [(node, i) for i in range(len(graph.white_ports[node]))]
                    else:
                        edges = list(graph.black_ports[node])
                    failures.append((idx, side, node, word, edges))
    return RelaxationCheck(ok=not failures, counterexamples=failures)
