"""Problem parsing, rendering, expansion, membership, renaming."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relab.errors import BudgetExceededError, ProblemFormatError
from relab.problems import (
    BLACK,
    WHITE,
    Config,
    Constraint,
    config,
    contains,
    equal_up_to_renaming,
    expand,
    make_problem,
    parse_problem,
    problem_hash,
    render_problem,
    rename_problem,
    swap_sides,
)

from conftest import BMM_TEXT


def brute_expand(constraint):
    """Independent expansion: raw product over slots, no state dedup."""
    out = set()
    for cfg in constraint.configs:
        slots = cfg.slots()
        for choice in itertools.product(*slots):
            out.add(tuple(sorted(choice)))
    return out


class TestParseRender:
    def test_bmm_counts(self, bmm):
        assert bmm.delta == 3
        assert len(bmm.white.configs) == 2
        assert len(bmm.black.configs) == 2
        assert bmm.alphabet == ("M", "O", "P")

    def test_sinkless_two_labels(self, sinkless):
        assert sinkless.alphabet == ("A", "B")

    def test_round_trip_identity(self, bmm):
        text = render_problem(bmm)
        assert render_problem(parse_problem(text)) == text

    def test_comments_and_blank_lines(self):
        text = "# a comment\n\ndelta: 2\nwhite:\n# another\nA B\nblack:\nA^2\nB^2\n"
        p = parse_problem(text)
        assert len(p.white.configs) == 1

    def test_unsorted_terms_canonicalized(self):
        a = parse_problem("delta: 3\nwhite:\nO^2 M\nblack:\nM [PO]^2\n")
        b = parse_problem("delta: 3\nwhite:\nM O^2\nblack:\nM [OP]^2\n")
        assert render_problem(a) == render_problem(b)

    def test_exponent_sum_mismatch(self):
        with pytest.raises(ProblemFormatError, match="exponent sum 4"):
            parse_problem("delta: 3\nwhite:\nM O^3\nblack:\nO^3\n")

    def test_empty_side_rejected(self):
        with pytest.raises(ProblemFormatError, match="empty black"):
            parse_problem("delta: 2\nwhite:\nA^2\nblack:\n")

    def test_delta_too_small(self):
        with pytest.raises(ProblemFormatError):
            parse_problem("delta: 1\nwhite:\nA\nblack:\nA\n")

    def test_zero_exponent_rejected(self):
        with pytest.raises(ProblemFormatError):
            parse_problem("delta: 2\nwhite:\nA^0 B^2\nblack:\nB^2\n")

    def test_multichar_labels_space_separated(self):
        p = parse_problem(
            "delta: 2\nwhite:\n[Foo Bar] Foo\nblack:\nFoo^2\nBar Foo\n"
        )
        assert p.alphabet == ("Bar", "Foo")
        assert render_problem(parse_problem(render_problem(p))) == render_problem(p)

    def test_unknown_label_in_constructed_problem(self):
        cfg = config(("AB", 2))
        with pytest.raises(ProblemFormatError, match="unknown label"):
            make_problem(2, [cfg], [cfg]).__class__(
                2, ("A",), Constraint(WHITE, (cfg,)), Constraint(BLACK, (cfg,))
            )

    def test_hash_stable(self, bmm):
        assert problem_hash(bmm) == problem_hash(parse_problem(BMM_TEXT))


class TestExpand:
    def test_no_disjunction(self):
        c = Constraint(WHITE, (config(("M", 1), ("O", 2)),))
        assert expand(c) == {("M", "O", "O")}

    def test_full_enumeration(self):
        c = Constraint(WHITE, (config(("AB", 2),),))
        assert expand(c) == {("A", "A"), ("A", "B"), ("B", "B")}

    def test_phi_white_five_multisets(self):
        # white side of the (1,1) matching encoding at delta 3
        p = parse_problem(
            "delta: 3\nwhite:\nM [OX]^2\n[PX] P^2\nblack:\nM [POX]^2\n[OX] O^2\n"
        )
        got = expand(p.white)
        assert got == {
            ("M", "O", "O"),
            ("M", "O", "X"),
            ("M", "X", "X"),
            ("P", "P", "P"),
            ("P", "P", "X"),
        }
        assert got == brute_expand(p.white)

    def test_cap_exceeded(self):
        c = Constraint(WHITE, (config(("ABCDEFGH", 8),),))
        with pytest.raises(BudgetExceededError):
            expand(c, cap=10)


class TestContains:
    def test_bmm_black_accepts_pointer_next_to_match(self, bmm):
        assert contains(bmm.black, ("M", "P", "O"))

    def test_bmm_black_rejects_pure_pointers(self, bmm):
        assert not contains(bmm.black, ("P", "P", "P"))

    def test_members_of_own_expansion(self, bmm):
        for single in expand(bmm.white) | expand(bmm.black):
            side = bmm.white if contains(bmm.white, single) else bmm.black
            assert contains(side, single)

    def test_exhaustive_equivalence_small(self):
        labels = "ABC"
        for delta in (2, 3):
            groups = [
                tuple(c)
                for k in range(1, 4)
                for c in itertools.combinations(labels, k)
            ]
            cfgs = [
                config((g1, 1), (g2, delta - 1))
                for g1 in groups
                for g2 in groups[:4]
            ]
            cons = Constraint(WHITE, tuple(cfgs[:6]))
            exp = expand(cons)
            for word in itertools.combinations_with_replacement(labels, delta):
                assert contains(cons, word) == (word in exp)


class TestSwapAndRenaming:
    def test_swap_involution(self, bmm):
        assert swap_sides(swap_sides(bmm)) == bmm

    def test_swap_direct(self, sinkless):
        s = swap_sides(sinkless)
        expected = parse_problem("delta: 3\nwhite:\nA [AB]^2\nblack:\nB [AB]^2\n")
        assert render_problem(s) == render_problem(expected)

    def test_identity_renaming(self, bmm):
        assert equal_up_to_renaming(bmm, bmm) == {"M": "M", "O": "O", "P": "P"}

    def test_renamed_bmm(self, bmm):
        q = rename_problem(bmm, {"M": "Q"})
        assert equal_up_to_renaming(q, bmm) == {"Q": "M", "O": "O", "P": "P"}

    def test_symmetric(self, bmm):
        q = rename_problem(bmm, {"M": "Q", "O": "R"})
        fwd = equal_up_to_renaming(q, bmm)
        back = equal_up_to_renaming(bmm, q)
        assert fwd and back == {v: k for k, v in fwd.items()}

    def test_different_problems(self, bmm, sinkless):
        assert equal_up_to_renaming(bmm, swap_sides(bmm)) is None
        assert equal_up_to_renaming(bmm, sinkless) is None

    def test_alphabet_guard(self):
        cfg = config(("ABCDEFGHI", 2),)
        p = make_problem(2, [cfg], [cfg])
        with pytest.raises(BudgetExceededError):
            equal_up_to_renaming(p, p)


# hypothesis generators for small random problems

labels_st = st.sampled_from(["A", "B", "C", "D"])


@st.composite
def configs_st(draw, delta):
    terms = []
    remaining = delta
    while remaining > 0:
        group = draw(st.frozensets(labels_st, min_size=1, max_size=3))
        mult = draw(st.integers(min_value=1, max_value=remaining))
        terms.append((tuple(sorted(group)), mult))
        remaining -= mult
    return Config(tuple(terms))


@st.composite
def problems_st(draw):
    delta = draw(st.integers(min_value=2, max_value=4))
    white = draw(st.lists(configs_st(delta), min_size=1, max_size=3))
    black = draw(st.lists(configs_st(delta), min_size=1, max_size=3))
    return make_problem(delta, white, black)


@settings(max_examples=60, deadline=None)
@given(problems_st())
def test_render_parse_round_trip(p):
    text = render_problem(p)
    again = parse_problem(text)
    assert render_problem(again) == text
    assert render_problem(parse_problem(render_problem(again))) == text


@settings(max_examples=60, deadline=None)
@given(problems_st(), st.randoms())
def test_expand_order_insensitive(p, rng):
    shuffled_white = list(p.white.configs)
    rng.shuffle(shuffled_white)
    q = make_problem(p.delta, shuffled_white, p.black.configs)
    assert expand(q.white) == expand(p.white)
    assert expand(p.white) == brute_expand(p.white)


@settings(max_examples=40, deadline=None)
@given(problems_st())
def test_contains_matches_expansion(p):
    exp = expand(p.black)
    alphabet = p.alphabet
    for word in itertools.combinations_with_replacement(alphabet, p.delta):
        assert contains(p.black, word) == (word in exp)
