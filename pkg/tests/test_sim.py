"""Graph generators, the proposal run, and the output checkers."""

import pytest

from relab.errors import ProblemFormatError
from relab.family import PhiParams, PsiParams, make_phi, make_psi, t_bound
from relab.problems import WHITE
from relab.sim import (
    SimGraph,
    check_problem_output,
    check_xy_matching,
    gen_regular_bipartite,
    gen_tree,
    read_graph,
    run_proposal,
    run_zero_round_witness,
    write_graph,
)
from relab.zeroround import zero_round_white


class TestGenerators:
    def test_smallest_graph_is_complete(self):
        g = gen_regular_bipartite(3, 3, seed=0)
        assert g.is_regular() and g.degrees_ok()
        neighbors = {frozenset(b for b, _ in ports) for ports in g.white_ports}
        assert neighbors == {frozenset(range(3))}

    def test_regularity_and_reciprocity(self):
        g = gen_regular_bipartite(200, 3, seed=7)
        assert g.is_regular() and g.degrees_ok() and not g.multigraph

    def test_determinism(self):
        assert gen_regular_bipartite(60, 4, seed=5) == gen_regular_bipartite(
            60, 4, seed=5
        )
        assert gen_regular_bipartite(60, 4, seed=5) != gen_regular_bipartite(
            60, 4, seed=6
        )

    def test_n_side_too_small(self):
        with pytest.raises(ProblemFormatError):
            gen_regular_bipartite(2, 3, seed=0)

    def test_tree_star(self):
        g = gen_tree(4, 1)
        assert g.n_white == 1 and g.n_black == 4
        assert len(g.white_ports[0]) == 4
        assert all(len(p) == 1 for p in g.black_ports)

    @pytest.mark.parametrize("delta,depth", [(3, 3), (4, 4), (5, 2)])
    def test_tree_node_count(self, delta, depth):
        g = gen_tree(delta, depth)
        want = 1 + delta * sum((delta - 1) ** i for i in range(depth))
        assert g.n_white + g.n_black == want

    def test_tree_levels_alternate(self):
        g = gen_tree(3, 4)
        # all neighbors of white nodes are black by construction; check the
        # reciprocal wiring is consistent
        assert g.degrees_ok()


class TestProposalRun:
    @pytest.mark.parametrize("delta", [2, 3, 4, 5, 6])
    def test_rounds_match_exact_bound(self, delta):
        for x in range(0, delta + 1):
            for y in range(1, delta):
                g = gen_regular_bipartite(40, delta, seed=13)
                labels, transcript = run_proposal(g, x, y)
                assert transcript.rounds_used == t_bound(delta, x, y).value
                assert check_xy_matching(g, labels, x, y).ok

    def test_full_capacity_trivial(self):
        g = gen_regular_bipartite(10, 3, seed=1)
        labels, transcript = run_proposal(g, 0, 3)
        assert transcript.rounds_used == 0
        assert all(l == "M" for row in labels for l in row)
        assert check_xy_matching(g, labels, 0, 3).ok

    def test_trees(self):
        for delta in (3, 4, 5):
            g = gen_tree(delta, 4)
            labels, transcript = run_proposal(g, 0, 1)
            assert transcript.rounds_used == t_bound(delta, 0, 1).value
            assert check_xy_matching(g, labels, 0, 1).ok

    def test_deterministic_replay(self):
        g = gen_regular_bipartite(30, 4, seed=3)
        a = run_proposal(g, 1, 2)
        b = run_proposal(g, 1, 2)
        assert a[0] == b[0] and a[1].rounds == b[1].rounds

    def test_one_proposal_per_edge(self):
        g = gen_regular_bipartite(50, 5, seed=9)
        _, transcript = run_proposal(g, 0, 1)
        seen = set()
        for rnd, msgs in enumerate(transcript.rounds):
            for kind, side, node, port in msgs:
                if kind != "propose":
                    continue
                if side == WHITE:
                    edge = (node, port)
                else:
                    edge = g.black_ports[node][port]
                assert edge not in seen
                seen.add(edge)

    def test_parameter_range(self):
        g = gen_regular_bipartite(10, 3, seed=0)
        with pytest.raises(ProblemFormatError):
            run_proposal(g, -1, 1)
        with pytest.raises(ProblemFormatError):
            run_proposal(g, 0, 0)

    def test_transcript_lines(self):
        g = gen_regular_bipartite(8, 2, seed=0)
        _, transcript = run_proposal(g, 0, 1)
        lines = transcript.lines()
        assert lines and all("kind=" in line for line in lines)


class TestChecker:
    def test_all_matched_packing_violation(self):
        g = gen_regular_bipartite(2, 2, seed=0)
        labels = [["M", "M"] for _ in range(g.n_white)]
        verdict = check_xy_matching(g, labels, 0, 1)
        packing = [v for v in verdict.violations if v[0] == "packing"]
        assert len(packing) == g.n_white + g.n_black

    def test_empty_matching_with_full_slack(self):
        g = gen_regular_bipartite(6, 3, seed=2)
        labels = [["X"] * 3 for _ in range(g.n_white)]
        assert check_xy_matching(g, labels, 3, 1).ok

    def test_covering_violation_reported(self):
        g = gen_regular_bipartite(6, 3, seed=2)
        labels = [["X"] * 3 for _ in range(g.n_white)]
        verdict = check_xy_matching(g, labels, 0, 1)
        assert any(v[0] == "covering" for v in verdict.violations)
        assert any(v[0] == "white-word" for v in verdict.violations)


class TestZeroRoundWitness:
    def test_saturated_encoding_witness_applies(self):
        p = make_phi(PhiParams(3, 3, 1))
        verdict = zero_round_white(p)
        g = gen_regular_bipartite(5, 3, seed=4)
        labels = run_zero_round_witness(p, verdict, g)
        assert check_problem_output(g, p, labels).ok

    def test_witness_valid_on_any_wiring(self):
        p = make_phi(PhiParams(4, 4, 2))
        verdict = zero_round_white(p)
        for seed in range(5):
            g = gen_regular_bipartite(8, 4, seed=seed)
            labels = run_zero_round_witness(p, verdict, g)
            assert check_problem_output(g, p, labels).ok

    def test_adversarial_port_wiring_breaks_non_witness(self):
        # K_{3,3} wired so one black node sees white port 1 everywhere: a
        # white algorithm fixing "M O O" by port then feeds it M^3
        delta = 3
        white_ports = [[None] * 3 for _ in range(3)]
        black_ports = [[None] * 3 for _ in range(3)]
        for w in range(3):
            white_ports[w][0] = (0, w)
            black_ports[0][w] = (w, 0)
        slots = [(b, j) for b in (1, 2) for j in range(3)]
        idx = 0
        for w in range(3):
            for i in (1, 2):
                b, j = slots[idx]
                idx += 1
                white_ports[w][i] = (b, j)
                black_ports[b][j] = (w, i)
        g = SimGraph(delta, white_ports, black_ports)
        assert g.degrees_ok() and g.is_regular()
        p = make_psi(PsiParams(3, 1, 0, 0))
        labels = [["M", "O", "O"] for _ in range(3)]  # fixed port-to-label map
        verdict = check_problem_output(g, p, labels)
        assert any(v[0] == "black-word" and v[2] == 0 for v in verdict.violations)

    def test_requires_witness(self, sinkless):
        verdict = zero_round_white(sinkless)
        g = gen_regular_bipartite(4, 3, seed=0)
        with pytest.raises(ProblemFormatError):
            run_zero_round_witness(sinkless, verdict, g)


class TestExchangeFormat:
    def test_round_trip(self):
        g = gen_regular_bipartite(7, 3, seed=1)
        h = read_graph(write_graph(g))
        assert h.white_ports == g.white_ports
        assert h.black_ports == g.black_ports

    def test_bad_line(self):
        with pytest.raises(ProblemFormatError):
            read_graph("w0 p1 - b0 p1\n")
