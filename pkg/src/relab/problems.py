"""Locally checkable problems: white/black constraints over a finite alphabet.

A problem couples a degree ``delta`` with two constraints.  Each constraint is
a set of condensed configurations: multisets of disjunction groups with
multiplicities summing to ``delta``.  Condensed forms are preserved for
display; semantic equality always goes through the expanded sets of single
configurations.  All values are immutable and every operation is pure.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import BudgetExceededError, ProblemFormatError

WHITE = "white"
BLACK = "black"

EXPAND_CAP = 10_000_000
RENAMING_ALPHABET_CAP = 8

_LABEL_RE = re.compile(r"[A-Za-z0-9_]+\Z")
# a term is either [members] or a bare label, optionally followed by ^int
_TERM_RE = re.compile(r"(\[[^\[\]]*\]|[^\s\[\]^]+)(?:\^(\d+))?\Z")


def other_side(side: str) -> str:
    return BLACK if side == WHITE else WHITE


def check_label(name: str) -> str:
    if not _LABEL_RE.match(name or ""):
        raise ProblemFormatError(f"invalid label {name!r}")
    return name


@dataclass(frozen=True, order=True)
class Config:
    """Condensed configuration: canonically sorted (group, multiplicity) terms.

    Groups are stored as sorted label tuples; equal groups are merged and
    terms sorted on construction, so structural equality is canonical
    equality.
    """

    terms: tuple[tuple[tuple[str, ...], int], ...]

    def __post_init__(self):
        merged: dict[tuple[str, ...], int] = {}
        for group, mult in self.terms:
            if not group:
                raise ProblemFormatError("empty disjunction group")
            if mult <= 0:
                raise ProblemFormatError(f"multiplicity {mult} must be positive")
            key = tuple(sorted(set(group)))
            for lab in key:
                check_label(lab)
            merged[key] = merged.get(key, 0) + mult
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))

    @property
    def delta(self) -> int:
        return sum(m for _, m in self.terms)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(lab for g, _ in self.terms for lab in g)

    def slots(self) -> list[tuple[str, ...]]:
        """Groups repeated by multiplicity, in canonical order."""
        return [g for g, m in self.terms for _ in range(m)]

    def rename(self, mapping: dict[str, str]) -> "Config":
        return Config(
            tuple((tuple(mapping.get(l, l) for l in g), m) for g, m in self.terms)
        )


def config(*terms) -> Config:
    """Build a Config from (labels, mult) pairs, skipping zero multiplicities.

    ``labels`` may be a string (each character a label, matching the bracket
    shorthand) or an iterable of label strings.
    """
    out = []
    for labels, mult in terms:
        if mult == 0:
            continue
        group = tuple(labels) if not isinstance(labels, str) else tuple(labels)
        out.append((group, mult))
    return Config(tuple(out))


@dataclass(frozen=True, order=True)
class Constraint:
    """One side's permitted configurations, duplicate-free and sorted."""

    side: str
    configs: tuple[Config, ...]

    def __post_init__(self):
        if self.side not in (WHITE, BLACK):
            raise ProblemFormatError(f"unknown side {self.side!r}")
        object.__setattr__(self, "configs", tuple(sorted(set(self.configs))))

    @property
    def support(self) -> frozenset[str]:
        return frozenset(lab for c in self.configs for lab in c.support)

    def rename(self, mapping: dict[str, str]) -> "Constraint":
        return Constraint(self.side, tuple(c.rename(mapping) for c in self.configs))


@dataclass(frozen=True)
class Problem:
    """Degree, alphabet and the two constraints; canonical by construction."""

    delta: int
    alphabet: tuple[str, ...]
    white: Constraint
    black: Constraint

    def __post_init__(self):
        if self.delta < 2:
            raise ProblemFormatError(f"delta {self.delta} < 2")
        object.__setattr__(self, "alphabet", tuple(sorted(set(self.alphabet))))
        for lab in self.alphabet:
            check_label(lab)
        known = set(self.alphabet)
        for cons in (self.white, self.black):
            for cfg in cons.configs:
                if cfg.delta != self.delta:
                    raise ProblemFormatError(
                        f"exponent sum {cfg.delta} != delta {self.delta}"
                    )
                unknown = cfg.support - known
                if unknown:
                    raise ProblemFormatError(
                        f"unknown label {sorted(unknown)[0]!r} in a configuration"
                    )
        if self.white.side != WHITE or self.black.side != BLACK:
            raise ProblemFormatError("constraint side tags do not match problem slots")

    def constraint(self, side: str) -> Constraint:
        return self.white if side == WHITE else self.black

    @property
    def used_labels(self) -> frozenset[str]:
        return self.white.support | self.black.support


def make_problem(delta, white_configs, black_configs) -> Problem:
    """Problem with the alphabet derived from the labels actually used."""
    white = Constraint(WHITE, tuple(white_configs))
    black = Constraint(BLACK, tuple(black_configs))
    return Problem(delta, tuple(white.support | black.support), white, black)


def swap_sides(p: Problem) -> Problem:
    """Exchange white and black constraints; an involution."""
    return Problem(
        p.delta,
        p.alphabet,
        Constraint(WHITE, p.black.configs),
        Constraint(BLACK, p.white.configs),
    )


def rename_problem(p: Problem, mapping: dict[str, str]) -> Problem:
    """Apply a label renaming to both constraints; must be injective on the alphabet."""
    image = [mapping.get(l, l) for l in p.alphabet]
    if len(set(image)) != len(image):
        raise ProblemFormatError("renaming is not injective on the alphabet")
    return make_problem(
        p.delta, p.white.rename(mapping).configs, p.black.rename(mapping).configs
    )


# ---------------------------------------------------------------------------
# parsing and rendering


def _parse_group(token: str, line_no: int) -> tuple[str, ...]:
    inner = token[1:-1].strip()
    if not inner:
        raise ProblemFormatError("empty disjunction group", line_no)
    if any(ch.isspace() for ch in inner):
        return tuple(inner.split())
    # single-character shorthand: [ABC] means labels A, B, C
    return tuple(inner)


def _parse_config_line(line: str, line_no: int) -> Config:
    terms = []
    for token in _tokenize(line, line_no):
        m = _TERM_RE.match(token)
        if not m:
            raise ProblemFormatError(f"bad term {token!r}", line_no)
        body, exp = m.groups()
        mult = int(exp) if exp is not None else 1
        if mult <= 0:
            raise ProblemFormatError(f"bad exponent in {token!r}", line_no)
        if body.startswith("["):
            group = _parse_group(body, line_no)
        else:
            group = (body,)
        for lab in group:
            if not _LABEL_RE.match(lab):
                raise ProblemFormatError(f"invalid label {lab!r}", line_no)
        terms.append((group, mult))
    return Config(tuple(terms))


def _tokenize(line: str, line_no: int) -> list[str]:
    tokens, i, n = [], 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == "[":
            j = line.find("]", i)
            if j < 0:
                raise ProblemFormatError("unclosed '['", line_no)
            j += 1
            while j < n and not line[j].isspace():
                j += 1
            tokens.append(line[i:j])
            i = j
        else:
            j = i
            while j < n and not line[j].isspace():
                j += 1
            tokens.append(line[i:j])
            i = j
    return tokens


def parse_problem(text: str) -> Problem:
    """Parse the problem file format; returns the canonicalized problem."""
    delta = None
    sections: dict[str, list[Config]] = {}
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("delta:"):
            try:
                delta = int(line.split(":", 1)[1])
            except ValueError:
                raise ProblemFormatError("bad delta value", line_no) from None
            continue
        if line in ("white:", "black:"):
            current = line[:-1]
            if current in sections:
                raise ProblemFormatError(f"duplicate section {line}", line_no)
            sections[current] = []
            continue
        if current is None:
            raise ProblemFormatError(f"configuration before a section: {line!r}", line_no)
        if delta is None:
            raise ProblemFormatError("delta must precede configurations", line_no)
        cfg = _parse_config_line(line, line_no)
        if cfg.delta != delta:
            raise ProblemFormatError(
                f"exponent sum {cfg.delta} != delta {delta}", line_no
            )
        sections[current].append(cfg)
    if delta is None:
        raise ProblemFormatError("missing 'delta:' line")
    for side in (WHITE, BLACK):
        if not sections.get(side):
            raise ProblemFormatError(f"empty {side} constraint")
    return make_problem(delta, sections[WHITE], sections[BLACK])


def render_group(group: tuple[str, ...]) -> str:
    if len(group) == 1:
        return group[0]
    if all(len(lab) == 1 for lab in group):
        return "[" + "".join(group) + "]"
    return "[" + " ".join(group) + "]"


def render_config(cfg: Config) -> str:
    parts = []
    for group, mult in cfg.terms:
        text = render_group(group)
        parts.append(text if mult == 1 else f"{text}^{mult}")
    return " ".join(parts)


def render_problem(p: Problem) -> str:
    lines = [f"delta: {p.delta}", "white:"]
    lines += [render_config(c) for c in p.white.configs]
    lines.append("black:")
    lines += [render_config(c) for c in p.black.configs]
    return "\n".join(lines) + "\n"


def problem_hash(p: Problem) -> str:
    return hashlib.sha256(render_problem(p).encode()).hexdigest()


# ---------------------------------------------------------------------------
# expansion and membership


@lru_cache(maxsize=4096)
def _expand_config(cfg: Config, cap: int) -> frozenset[tuple[str, ...]]:
    states: set[tuple[str, ...]] = {()}
    for group in cfg.slots():
        nxt = set()
        for partial in states:
            for lab in group:
                nxt.add(tuple(sorted(partial + (lab,))))
            if len(nxt) > cap:
                raise BudgetExceededError(
                    f"expansion exceeds cap {cap} single configurations"
                )
        states = nxt
    return frozenset(states)


def expand(constraint: Constraint, cap: int = EXPAND_CAP) -> frozenset[tuple[str, ...]]:
    """All single configurations (sorted label tuples) the constraint generates."""
    out: set[tuple[str, ...]] = set()
    for cfg in constraint.configs:
        out |= _expand_config(cfg, cap)
        if len(out) > cap:
            raise BudgetExceededError(
                f"expansion exceeds cap {cap} single configurations"
            )
    return frozenset(out)


def _config_contains(cfg: Config, counts: dict[str, int]) -> bool:
    terms = cfg.terms

    def assign(i: int, remaining: dict[str, int]) -> bool:
        if i == len(terms):
            return True
        group, need = terms[i]
        avail = [l for l in group if remaining.get(l, 0) > 0]

        def pick(j: int, left: int) -> bool:
            if left == 0:
                return assign(i + 1, remaining)
            if j == len(avail):
                return False
            lab = avail[j]
            most = min(left, remaining[lab])
            for take in range(most, -1, -1):
                remaining[lab] -= take
                if pick(j + 1, left - take):
                    remaining[lab] += take
                    return True
                remaining[lab] += take
            return False

        if sum(remaining.get(l, 0) for l in group) < need:
            return False
        return pick(0, need)

    return assign(0, dict(counts))


def contains(constraint: Constraint, single: tuple[str, ...]) -> bool:
    """Membership of a single configuration, by assignment search per condensed form."""
    counts: dict[str, int] = {}
    for lab in single:
        counts[lab] = counts.get(lab, 0) + 1
    for cfg in constraint.configs:
        if cfg.delta != len(single):
            raise ProblemFormatError(
                f"configuration size {len(single)} != delta {cfg.delta}"
            )
        if not (set(counts) <= set(cfg.support)):
            continue
        if _config_contains(cfg, counts):
            return True
    return False


def strength_pairs(
    expanded: frozenset[tuple[str, ...]], labels
) -> frozenset[tuple[str, str]]:
    """Pairs (K, L) such that replacing any single K by L stays inside the set.

    This is the definitional replacement test on an expanded constraint; the
    result is reflexive and transitive.
    """
    exp = set(expanded)
    rel = set()
    for K in labels:
        k_words = [s for s in exp if K in s]
        for L in labels:
            if K == L:
                rel.add((K, L))
                continue
            ok = True
            for s in k_words:
                lst = list(s)
                lst.remove(K)
                lst.append(L)
                if tuple(sorted(lst)) not in exp:
                    ok = False
                    break
            if ok:
                rel.add((K, L))
    return frozenset(rel)


# ---------------------------------------------------------------------------
# equality up to renaming


def _label_signature(p: Problem, exp_white, exp_black):
    sig = {}
    for lab in p.alphabet:
        parts = []
        for exp in (exp_white, exp_black):
            occ = sorted(s.count(lab) for s in exp if lab in s)
            parts.append(tuple(occ))
        sig[lab] = tuple(parts)
    return sig


def equal_up_to_renaming(
    p: Problem, q: Problem, max_alphabet: int = RENAMING_ALPHABET_CAP
) -> dict[str, str] | None:
    """A bijection of alphabets under which expanded constraints coincide, if any."""
    if max(len(p.alphabet), len(q.alphabet)) > max_alphabet:
        raise BudgetExceededError(
            f"alphabet larger than {max_alphabet}; renaming search refused"
        )
    if p.delta != q.delta or len(p.alphabet) != len(q.alphabet):
        return None
    pw, pb = expand(p.white), expand(p.black)
    qw, qb = expand(q.white), expand(q.black)
    if len(pw) != len(qw) or len(pb) != len(qb):
        return None
    sig_p = _label_signature(p, pw, pb)
    sig_q = _label_signature(q, qw, qb)
    by_sig: dict[tuple, list[str]] = {}
    for lab, s in sig_q.items():
        by_sig.setdefault(s, []).append(lab)
    counts_p: dict[tuple, int] = {}
    for s in sig_p.values():
        counts_p[s] = counts_p.get(s, 0) + 1
    if counts_p != {s: len(v) for s, v in by_sig.items()}:
        return None
    labels = list(p.alphabet)

    def backtrack(i: int, mapping: dict[str, str], used: set[str]):
        if i == len(labels):
            rw = {tuple(sorted(mapping[l] for l in s)) for s in pw}
            rb = {tuple(sorted(mapping[l] for l in s)) for s in pb}
            if rw == set(qw) and rb == set(qb):
                return dict(mapping)
            return None
        lab = labels[i]
        for cand in sorted(by_sig.get(sig_p[lab], [])):
            if cand in used:
                continue
            mapping[lab] = cand
            used.add(cand)
            found = backtrack(i + 1, mapping, used)
            if found:
                return found
            used.discard(cand)
            del mapping[lab]
        return None

    return backtrack(0, {}, set())


def canonical_signature(p: Problem, max_alphabet: int = RENAMING_ALPHABET_CAP) -> str:
    """Renaming-invariant canonical text: minimum render over signature-respecting
    relabelings to positional names."""
    if len(p.alphabet) > max_alphabet:
        raise BudgetExceededError(
            f"alphabet larger than {max_alphabet}; canonical signature refused"
        )
    exp_w, exp_b = expand(p.white), expand(p.black)
    sig = _label_signature(p, exp_w, exp_b)
    groups: dict[tuple, list[str]] = {}
    for lab in p.alphabet:
        groups.setdefault(sig[lab], []).append(lab)
    ordered_sigs = sorted(groups)
    slots = []
    for s in ordered_sigs:
        slots.append(sorted(groups[s]))
    names = [f"L{i}" for i in range(len(p.alphabet))]

    best = None
    from itertools import permutations as _perms

    def assign(gi: int, mapping: dict[str, str], next_name: int):
        nonlocal best
        if gi == len(slots):
            text = render_problem(rename_problem(p, mapping))
            if best is None or text < best:
                best = text
            return
        labs = slots[gi]
        for perm in _perms(labs):
            m2 = dict(mapping)
            for k, lab in enumerate(perm):
                m2[lab] = names[next_name + k]
            assign(gi + 1, m2, next_name + len(labs))

    assign(0, {}, 0)
    return best
