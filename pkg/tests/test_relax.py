"""Strength orders, diagrams, and the certified relaxation operations."""

import pytest

from relab.errors import (
    ProblemFormatError,
    UnjustifiedRelaxationError,
    UnsoundRelaxationError,
)
from relab.family import PhiParams, PsiParams, make_phi, make_psi
from relab.problems import (
    BLACK,
    WHITE,
    config,
    equal_up_to_renaming,
    expand,
    make_problem,
    parse_problem,
    render_problem,
)
from relab.relax import (
    add_configurations,
    check_relaxation_on_samples,
    diagram,
    merge_labels,
    relax_to_targets,
    relaxation_map,
    render_diagram,
    replace_everywhere,
    strength_order,
)
from relab.sim import gen_regular_bipartite, run_proposal
from relab.speedup import re_black, re_white


def six_label_example(delta=3):
    """A six-label problem two rounds below the matching encoding."""
    white = [
        config(("M", 1), ("O", delta - 1)),
        config(("Y", 1), ("P", delta - 1)),
        config(("X", 1), ("Z", 1), ("O", delta - 2)),
    ]
    black = [
        config(("MYX", 1), ("PYOX", delta - 1)),
        config(("ZMPYOX", 1), ("OX", delta - 1)),
    ]
    return make_problem(delta, white, black)


class TestStrengthOrder:
    def test_bmm_black_o_stronger_than_p(self, bmm):
        order = strength_order(bmm, BLACK)
        assert order.at_least_as_strong("O", "P")
        assert not order.at_least_as_strong("P", "O")
        assert order.stronger("O", "P")

    def test_six_label_example_y_below_x(self):
        p = six_label_example()
        order = strength_order(p, BLACK)
        assert order.at_least_as_strong("X", "Y")

    def test_all_words_everything_equal(self):
        p = parse_problem("delta: 2\nwhite:\n[AB]^2\nblack:\n[AB]^2\n")
        order = strength_order(p, BLACK)
        assert order.equally_strong("A", "B")

    def test_conservative_fallback_under_budget(self, bmm):
        order = strength_order(bmm, BLACK, cap=2)
        assert not order.exact
        # the group-wise test never claims pairs the exact test rejects
        exact = strength_order(bmm, BLACK)
        assert order.relation <= exact.relation

    def test_preorder_properties(self, bmm, sinkless):
        for p in (bmm, sinkless, six_label_example()):
            for side in (WHITE, BLACK):
                order = strength_order(p, side)
                for k in p.alphabet:
                    assert order.at_least_as_strong(k, k)
                for (a, b) in order.relation:
                    for (c, d) in order.relation:
                        if b == c:
                            assert (a, d) in order.relation


class TestDiagram:
    def test_psi_black_diagram_chain(self):
        p = make_psi(PsiParams(5, 2, 1, 1))
        d = diagram(p, BLACK)
        for arrow in (("Z", "P"), ("P", "O"), ("O", "X"), ("M", "X")):
            assert arrow in d.arrows

    def test_equally_strong_double_arrow(self):
        p = parse_problem("delta: 2\nwhite:\n[AB]^2\nblack:\n[AB]^2\n")
        d = diagram(p, BLACK)
        assert ("A", "B") in d.arrows and ("B", "A") in d.arrows

    def test_no_skipping_intermediate(self):
        p = make_psi(PsiParams(5, 2, 1, 1))
        d = diagram(p, BLACK)
        assert ("Z", "O") not in d.arrows
        assert ("Z", "X") not in d.arrows

    def test_extreme_x_gains_arrows(self):
        generic = diagram(make_phi(PhiParams(4, 1, 2)), BLACK)
        extreme = diagram(make_phi(PhiParams(4, 4, 2)), BLACK)
        assert len(extreme.arrows) > len(generic.arrows)

    def test_render_format(self, bmm):
        text = render_diagram(diagram(bmm, BLACK))
        assert "P -> O" in text.splitlines()


class TestMergeLabels:
    def test_merge_y_into_x_simplifies_six_label_example(self):
        p = six_label_example()
        merged = merge_labels(p, relaxation_map({"Y": "X"}, WHITE))
        expected = make_problem(
            3,
            [
                config(("M", 1), ("O", 2)),
                config(("X", 1), ("P", 2)),
                config(("X", 1), ("Z", 1), ("O", 1)),
            ],
            [
                config(("MX", 1), ("POX", 2)),
                config(("ZMPOX", 1), ("OX", 2)),
            ],
        )
        assert equal_up_to_renaming(merged, expected)
        assert render_problem(merged) == render_problem(expected)

    def test_identity_map(self, bmm):
        assert merge_labels(bmm, relaxation_map({}, WHITE)) == bmm

    def test_unjustified_merge_rejected(self, bmm):
        # P is not at least as strong as O in the black constraint
        with pytest.raises(UnjustifiedRelaxationError):
            merge_labels(bmm, relaxation_map({"O": "P"}, WHITE))

    def test_justified_merge_drops_label(self, bmm):
        merged = merge_labels(bmm, relaxation_map({"P": "O"}, WHITE))
        assert "P" not in merged.alphabet


class TestReplaceEverywhere:
    def test_identity(self, bmm):
        assert replace_everywhere(bmm, "M", "M") == bmm

    def test_bmm_pointer_to_unmatched(self, bmm):
        q = replace_everywhere(bmm, "P", "O")
        assert ("O", "O", "O") in expand(q.white)
        assert "P" not in q.alphabet

    def test_alphabet_shrinks(self, bmm):
        assert len(replace_everywhere(bmm, "M", "O").alphabet) == 2


class TestRelaxToTargets:
    def test_family_step_relaxation_hits_predicted_parameters(self):
        src = make_psi(PsiParams(4, 1, 1, 1))
        step = re_black(src)
        X, MX, OX, POX, MZPOX = map(frozenset, ("X", "MX", "OX", "POX", "MZPOX"))
        d = min(1 + 1, 4 - 1)
        targets = [
            [(MZPOX, 0), (MX, 1), (POX, 3)],
            [(MZPOX, 1), (POX, d), (OX, 3 - d)],
            [(MZPOX, 1), (X, 1), (POX, 2)],
        ]
        renaming = {X: "Z", OX: "P", POX: "O", MX: "M", MZPOX: "X"}
        produced = relax_to_targets(step, targets, renaming)
        expected = make_psi(PsiParams(4, 1, d, 1, side=BLACK))
        assert d == 2
        bijection = equal_up_to_renaming(produced, expected)
        assert bijection == {l: l for l in produced.alphabet}

    def test_identity_targets_keep_result(self, sinkless):
        step = re_black(sinkless)
        A, AB = frozenset("A"), frozenset("AB")
        produced = relax_to_targets(
            step, [[(A, 1), (AB, 2)]], {A: "A", AB: "AB"}
        )
        assert render_problem(produced) == render_problem(step.result)

    def test_unsound_targets_report_witness(self, sinkless):
        step = re_black(sinkless)
        A = frozenset("A")
        with pytest.raises(UnsoundRelaxationError) as err:
            relax_to_targets(step, [[(A, 3)]], {A: "A"})
        assert err.value.witness is not None

    def test_renaming_must_cover_used_sets(self, sinkless):
        step = re_black(sinkless)
        A, AB = frozenset("A"), frozenset("AB")
        with pytest.raises(ProblemFormatError, match="renaming"):
            relax_to_targets(step, [[(A, 1), (AB, 2)]], {A: "A"})


class TestAddConfigurations:
    def test_add_existing_is_noop(self, bmm):
        assert add_configurations(bmm, WHITE, [bmm.white.configs[0]]) == bmm

    def test_added_configuration_completes_family_problem(self):
        # the second chain step without its extra configuration, delta 3, x=0, y=1
        phi_prime = parse_problem(
            "delta: 3\nwhite:\n[MX] [OPX]^2\n[OX]^3\nblack:\nM O^2\nP^2 X\n"
        )
        step = re_white(phi_prime)
        X, MX, OX, POX, MPOX = map(frozenset, ("X", "MX", "OX", "POX", "MPOX"))
        targets = [
            [(MPOX, 0), (MX, 1), (POX, 2)],
            [(MPOX, 1), (POX, 0), (OX, 2)],
            [(MPOX, 1), (X, 1), (POX, 1)],
        ]
        renaming = {X: "Z", OX: "P", POX: "O", MX: "M", MPOX: "X"}
        partial = relax_to_targets(step, targets, renaming)
        extra = config(("MZPOX", 1), ("X", 1), ("POX", 1))
        completed = add_configurations(partial, BLACK, [extra])
        assert render_problem(completed) == render_problem(
            make_psi(PsiParams(3, 1, 0, 0))
        )
        assert render_problem(partial) != render_problem(completed)

    def test_add_all_words(self, bmm):
        q = add_configurations(bmm, BLACK, [config(("MOP", 3),)])
        assert len(expand(q.black)) == 10  # C(3+2,2) multisets over 3 labels


class TestRelaxationSamples:
    def _samples(self, count=12):
        phi = make_phi(PhiParams(3, 0, 1))
        samples = []
        for seed in range(count):
            g = gen_regular_bipartite(12, 3, seed=seed)
            labels, _ = run_proposal(g, 0, 1)
            samples.append((g, labels))
        return phi, samples

    def test_identity_passes(self):
        phi, samples = self._samples()
        check = check_relaxation_on_samples(
            phi, phi, relaxation_map({}, WHITE), samples
        )
        assert check.ok

    def test_justified_merge_passes(self):
        phi, samples = self._samples(50)
        merged = merge_labels(phi, relaxation_map({"P": "O"}, WHITE))
        check = check_relaxation_on_samples(
            phi, merged, relaxation_map({"P": "O"}, WHITE), samples
        )
        assert check.ok

    def test_unjustified_rewrite_fails_with_witness(self):
        phi, samples = self._samples(20)
        bogus = relaxation_map({"M": "P"}, WHITE)
        target = make_problem(
            3,
            [cfg.rename({"M": "P"}) for cfg in phi.white.configs],
            phi.black.configs,
        )
        check = check_relaxation_on_samples(phi, target, bogus, samples)
        assert not check.ok
        sample_idx, side, node, word, edges = check.counterexamples[0]
        assert side == BLACK and edges

    def test_certified_operations_pass_on_random_graphs(self):
        # a hundred trials over two degrees: every operation this module
        # certifies as a relaxation survives the sample check
        for delta, trials in ((3, 50), (4, 50)):
            phi = make_phi(PhiParams(delta, 1, 1))
            merged = merge_labels(phi, relaxation_map({"P": "O"}, WHITE))
            replaced = replace_everywhere(phi, "P", "O")
            samples = []
            for seed in range(trials):
                g = gen_regular_bipartite(40 + (seed % 3) * 60, delta, seed=seed)
                labels, _ = run_proposal(g, 1, 1)
                samples.append((g, labels))
            for target, mapping in ((merged, {"P": "O"}), (replaced, {"P": "O"})):
                check = check_relaxation_on_samples(
                    phi, target, relaxation_map(mapping, WHITE), samples
                )
                assert check.ok, (delta, target)
