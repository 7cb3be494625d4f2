"""Port-numbering runtime: graph generators, the proposal algorithm, checkers.

Graphs are bipartite with per-node ordered port arrays; ports are 0-based
internally and 1-based in the exchange format.  The proposal algorithm runs
under a strict round barrier: all sends of a round are collected, then
delivered, so results are independent of node iteration order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import ProblemFormatError, RelabError
from .family import PhiParams, make_phi
from .problems import BLACK, WHITE, Problem, contains

GEN_RETRY_LIMIT = 60


@dataclass
class SimGraph:
    """Bipartite port-numbered graph; ports[v][i] = (neighbor, neighbor_port)."""

    delta: int
    white_ports: list[list[tuple[int, int]]]
    black_ports: list[list[tuple[int, int]]]
    multigraph: bool = False

    @property
    def n_white(self) -> int:
        return len(self.white_ports)

    @property
    def n_black(self) -> int:
        return len(self.black_ports)

    def degrees_ok(self) -> bool:
        return all(
            self.black_ports[b][j] == (w, i)
            for w, ports in enumerate(self.white_ports)
            for i, (b, j) in enumerate(ports)
        )

    def is_regular(self) -> bool:
        return all(len(p) == self.delta for p in self.white_ports) and all(
            len(p) == self.delta for p in self.black_ports
        )


def _wire(delta: int, edges: list[tuple[int, int]], n_white: int, n_black: int, rng):
    """Assign ports: shuffle each node's incident edge order, then cross-link."""
    white_inc: list[list[int]] = [[] for _ in range(n_white)]
    black_inc: list[list[int]] = [[] for _ in range(n_black)]
    for eid, (w, b) in enumerate(edges):
        white_inc[w].append(eid)
        black_inc[b].append(eid)
    if rng is not None:
        for lst in white_inc:
            rng.shuffle(lst)
        for lst in black_inc:
            rng.shuffle(lst)
    w_port = {}
    b_port = {}
    for w, lst in enumerate(white_inc):
        for i, eid in enumerate(lst):
            w_port[eid] = (w, i)
    for b, lst in enumerate(black_inc):
        for j, eid in enumerate(lst):
            b_port[eid] = (b, j)
    white_ports = [[(-1, -1)] * len(lst) for lst in white_inc]
    black_ports = [[(-1, -1)] * len(lst) for lst in black_inc]
    for eid in range(len(edges)):
        w, i = w_port[eid]
        b, j = b_port[eid]
        white_ports[w][i] = (b, j)
        black_ports[b][j] = (w, i)
    return white_ports, black_ports


def gen_regular_bipartite(
    n_side: int,
    delta: int,
    seed: int,
    retries: int = GEN_RETRY_LIMIT,
    allow_multigraph: bool = False,
) -> SimGraph:
    """Delta-regular bipartite graph as a union of delta random perfect
    matchings; repeated edges are repaired by random swaps, resampling the
    offending matching up to the retry limit."""
    if n_side < delta:
        raise ProblemFormatError(f"n_side {n_side} < delta {delta}")
    rng = random.Random(seed)
    if n_side == delta:
        # the union is forced to be complete; only the wiring is random
        edges = [(w, (w + m) % n_side) for m in range(delta) for w in range(n_side)]
        wp, bp = _wire(delta, edges, n_side, n_side, rng)
        return SimGraph(delta, wp, bp)
    taken: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    multi = False
    for _ in range(delta):
        placed = False
        for _ in range(retries):
            perm = list(range(n_side))
            rng.shuffle(perm)
            for _ in range(retries):
                bad = [w for w in range(n_side) if (w, perm[w]) in taken]
                if not bad:
                    break
                for w in bad:
                    w2 = rng.randrange(n_side)
                    perm[w], perm[w2] = perm[w2], perm[w]
            if not bad:
                placed = True
                break
        if not placed:
            if not allow_multigraph:
                raise RelabError(
                    f"no simple graph within {retries} retries "
                    f"(n_side={n_side}, delta={delta})"
                )
            multi = True
        taken.update((w, perm[w]) for w in range(n_side))
        edges.extend((w, perm[w]) for w in range(n_side))
    wp, bp = _wire(delta, edges, n_side, n_side, rng)
    return SimGraph(delta, wp, bp, multigraph=multi)


def gen_tree(delta: int, depth: int) -> SimGraph:
    """Balanced 2-colored tree: white root of degree delta, internal nodes of
    degree delta, leaves at the given depth."""
    if depth < 1:
        raise ProblemFormatError("depth must be at least 1")
    white_ports: list[list] = [[]]
    black_ports: list[list] = []
    # frontier entries: (side, node id); root is white 0 at level 0
    frontier = [(WHITE, 0)]
    for level in range(depth):
        nxt = []
        child_side = BLACK if level % 2 == 0 else WHITE
        for side, node in frontier:
            fanout = delta if level == 0 else delta - 1
            for _ in range(fanout):
                if child_side == BLACK:
                    child = len(black_ports)
                    black_ports.append([])
                else:
                    child = len(white_ports)
                    white_ports.append([])
                parent_ports = white_ports if side == WHITE else black_ports
                child_ports = black_ports if child_side == BLACK else white_ports
                i = len(parent_ports[node])
                j = len(child_ports[child])
                parent_ports[node].append((child, j))
                child_ports[child].append((node, i))
                nxt.append((child_side, child))
        frontier = nxt
    return SimGraph(delta, white_ports, black_ports)


# ---------------------------------------------------------------------------
# the proposal algorithm


@dataclass
class Transcript:
    rounds: list[list[tuple[str, str, int, int]]] = field(default_factory=list)
    rounds_used: int = 0

    def lines(self) -> list[str]:
        out = []
        for rnd, msgs in enumerate(self.rounds, start=1):
            for kind, side, node, port in msgs:
                out.append(f"round={rnd} side={side} node={node} port={port + 1} kind={kind}")
        return out


class _NodeState:
    __slots__ = ("F", "M", "S", "R")

    def __init__(self, degree: int):
        self.F = set(range(degree))
        self.M: set[int] = set()
        self.S: set[int] = set()
        self.R: set[int] = set()

    def disjoint(self) -> bool:
        return len(self.F) + len(self.M) + len(self.S) + len(self.R) == len(
            self.F | self.M | self.S | self.R
        )


def _ceil(a: int, b: int) -> int:
    return -(-a // b)


def run_proposal(g: SimGraph, x: int, y: int):
    """The alternating proposal procedure for x-maximal y-matching.

    Returns (labels, transcript) where labels[w][i] is the output of white
    node w on port i.  Uses exactly the optimal number of rounds: when the
    plain and slack ceilings coincide the black side starts and one round is
    saved (solving the x = 0 variant)."""
    delta = g.delta
    if not (0 <= x <= delta and 1 <= y <= delta):
        raise ProblemFormatError(f"parameters x={x}, y={y} out of range for delta {delta}")
    transcript = Transcript()
    if y == delta:
        labels = [["M"] * len(ports) for ports in g.white_ports]
        return labels, transcript

    k_plain = _ceil(delta, y)
    k_slack = _ceil(delta - x, y)
    if k_plain == k_slack:
        start, total_rounds = BLACK, 2 * k_slack - 1
    else:
        start, total_rounds = WHITE, 2 * k_slack

    white = [_NodeState(len(p)) for p in g.white_ports]
    black = [_NodeState(len(p)) for p in g.black_ports]
    states = {WHITE: white, BLACK: black}
    ports = {WHITE: g.white_ports, BLACK: g.black_ports}
    proposed_edges = set()

    for rnd in range(1, total_rounds + 1):
        active = start if rnd % 2 == 1 else (WHITE if start == BLACK else BLACK)
        passive = WHITE if active == BLACK else BLACK
        accepts = []  # (passive node, passive port)
        proposals = []
        msgs = []
        for node, st in enumerate(states[active]):
            if st.M:
                continue  # terminated
            if st.R:
                port = min(st.R)
                st.R.discard(port)
                st.M.add(port)
                peer, peer_port = ports[active][node][port]
                accepts.append((peer, peer_port))
                msgs.append(("accept", active, node, port))
            else:
                take = sorted(st.F)[:y]
                for port in take:
                    st.F.discard(port)
                    st.S.add(port)
                    peer, peer_port = ports[active][node][port]
                    edge = (node, port) if active == WHITE else (peer, peer_port)
                    assert edge not in proposed_edges
                    proposed_edges.add(edge)
                    proposals.append((peer, peer_port))
                    msgs.append(("propose", active, node, port))
        for node, port in accepts:
            st = states[passive][node]
            st.S.discard(port)
            st.M.add(port)
        for node, port in proposals:
            st = states[passive][node]
            if not st.M:
                st.F.discard(port)
                st.R.add(port)
        for side in (WHITE, BLACK):
            assert all(st.disjoint() for st in states[side])
        transcript.rounds.append(msgs)
    transcript.rounds_used = total_rounds

    # output step: whites decide; a pending proposal may be accepted silently
    for w, st in enumerate(white):
        if not st.M and st.R:
            port = min(st.R)
            st.R.discard(port)
            st.M.add(port)
            b, j = g.white_ports[w][port]
            bst = black[b]
            bst.S.discard(j)
            bst.M.add(j)

    _assert_matched_guarantee(g, white, black, start, k_slack, y)

    labels = []
    for w, st in enumerate(white):
        deg = len(g.white_ports[w])
        if st.M:
            labels.append(["M" if i in st.M else "O" for i in range(deg)])
        elif start == BLACK:
            # every neighbor of an unmatched white is matched here
            labels.append(["P"] * deg)
        else:
            labels.append(["P" if i in st.S else "X" for i in range(deg)])
    return labels, transcript


def _assert_matched_guarantee(g, white, black, start, k_slack, y):
    phases = {WHITE: k_slack, BLACK: k_slack}
    if start == BLACK:
        phases[WHITE] = k_slack - 1
    matched_w = [bool(st.M) for st in white]
    matched_b = [bool(st.M) for st in black]
    for side, states, ports, matched_other in (
        (WHITE, white, g.white_ports, matched_b),
        (BLACK, black, g.black_ports, matched_w),
    ):
        need = phases[side] * y
        for node, st in enumerate(states):
            if st.M:
                continue
            got = sum(1 for peer, _ in ports[node] if matched_other[peer])
            if got < min(len(ports[node]), need):
                raise AssertionError(
                    f"unmatched {side} node {node} has {got} matched neighbors"
                )


# ---------------------------------------------------------------------------
# checkers


@dataclass
class MatchingVerdict:
    ok: bool
    violations: list = field(default_factory=list)


def _black_labels(g: SimGraph, labels) -> list[list[str]]:
    return [
        [labels[w][i] for w, i in ports] for ports in g.black_ports
    ]


def check_xy_matching(g: SimGraph, labels, x: int, y: int) -> MatchingVerdict:
    """Packing and covering checks from the problem definition plus, on
    regular graphs, the encoded word checks."""
    delta = g.delta
    black_lab = _black_labels(g, labels)
    matched_w = [row.count("M") for row in labels]
    matched_b = [row.count("M") for row in black_lab]
    violations = []
    for side, counts in ((WHITE, matched_w), (BLACK, matched_b)):
        for node, cnt in enumerate(counts):
            if cnt > y:
                violations.append(("packing", side, node, cnt))
    for side, counts, ports, other_counts in (
        (WHITE, matched_w, g.white_ports, matched_b),
        (BLACK, matched_b, g.black_ports, matched_w),
    ):
        for node, cnt in enumerate(counts):
            if cnt:
                continue
            deg = len(ports[node])
            got = sum(1 for peer, _ in ports[node] if other_counts[peer] > 0)
            if got < min(deg, delta - x):
                violations.append(("covering", side, node, got))
    if g.is_regular():
        phi = make_phi(PhiParams(delta, x, y))
        for w, row in enumerate(labels):
            if not contains(phi.white, tuple(sorted(row))):
                violations.append(("white-word", WHITE, w, tuple(sorted(row))))
        for b, row in enumerate(black_lab):
            if not contains(phi.black, tuple(sorted(row))):
                violations.append(("black-word", BLACK, b, tuple(sorted(row))))
    return MatchingVerdict(ok=not violations, violations=violations)


def check_problem_output(g: SimGraph, p: Problem, labels) -> MatchingVerdict:
    """Generic output checker: every node's word must satisfy its constraint."""
    violations = []
    for w, row in enumerate(labels):
        if not contains(p.white, tuple(sorted(row))):
            violations.append(("white-word", WHITE, w, tuple(sorted(row))))
    for b, row in enumerate(_black_labels(g, labels)):
        if not contains(p.black, tuple(sorted(row))):
            violations.append(("black-word", BLACK, b, tuple(sorted(row))))
    return MatchingVerdict(ok=not violations, violations=violations)


def run_zero_round_witness(p: Problem, verdict, g: SimGraph):
    """Apply a zero-round witness configuration through the fixed
    port-to-label bijection at every white node."""
    if not verdict.solvable or verdict.witness is None:
        raise ProblemFormatError("verdict carries no witness")
    cfg, _support = verdict.witness
    if not g.is_regular() or g.delta != p.delta:
        raise ProblemFormatError("witness application needs a delta-regular graph")
    return [list(cfg) for _ in range(g.n_white)]


# ---------------------------------------------------------------------------
# exchange formats


def write_graph(g: SimGraph) -> str:
    lines = []
    for w, ports in enumerate(g.white_ports):
        for i, (b, j) in enumerate(ports):
            lines.append(f"w{w} p{i + 1} -- b{b} p{j + 1}")
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> SimGraph:
    edges = []
    max_w = max_b = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            left, right = line.split("--")
            wpart, wport = left.split()
            bpart, bport = right.split()
            w, i = int(wpart[1:]), int(wport[1:]) - 1
            b, j = int(bpart[1:]), int(bport[1:]) - 1
        except ValueError:
            raise ProblemFormatError(f"bad edge line {line!r}", line_no) from None
        edges.append((w, i, b, j))
        max_w, max_b = max(max_w, w), max(max_b, b)
    white_ports = [dict() for _ in range(max_w + 1)]
    black_ports = [dict() for _ in range(max_b + 1)]
    for w, i, b, j in edges:
        white_ports[w][i] = (b, j)
        black_ports[b][j] = (w, i)
    def dense(port_maps):
        out = []
        for node, m in enumerate(port_maps):
            if sorted(m) != list(range(len(m))):
                raise ProblemFormatError(f"ports of node {node} are not 1..deg")
            out.append([m[i] for i in range(len(m))])
        return out
    wp, bp = dense(white_ports), dense(black_ports)
    delta = max((len(p) for p in wp + bp), default=0)
    return SimGraph(delta, wp, bp)
