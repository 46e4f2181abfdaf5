"""Randomised laws. Every property records how many cases it ran in COUNTS."""

from collections import Counter
from functools import lru_cache

from hypothesis import given
from hypothesis import strategies as st

from conftest import load_scheme
from artifact.core import PartialTree, first_difference, tree_leq
from artifact.cpda import (
    LinkedStack,
    Push1,
    Rew,
    apply_op,
    collapse,
    format_stack,
    parse_stack,
    pop,
    push,
    push1,
    rewrite_top,
    shape_op,
    stack_shape,
)
from artifact.games import ParityArena
from artifact.hors import Budget, unfold_value_tree
from artifact.mucalc import FALSE, TRUE, eval_bounded, format_formula, naive_eval, parse_formula
from artifact.treeauto import ParityTreeAutomaton
from strategies import (
    FGA,
    GAMMAS,
    PROPERTY,
    formulas,
    prunings,
    random_arena,
    random_automaton,
    stacks,
    stacks_with_op,
    tree_chains,
    trees,
)

COUNTS = Counter()


# ---------------------------------------------------------------- stacks


@PROPERTY
@given(stacks(), st.data())
def test_pop_after_push(s, data):
    if s.order == 1:
        g = data.draw(st.sampled_from(GAMMAS))
        assert pop(push1(s, g, 1), 1) == s
    else:
        j = data.draw(st.integers(2, s.order))
        assert pop(push(s, j), j) == s
    COUNTS["pop_push"] += 1


@PROPERTY
@given(stacks(), st.sampled_from(GAMMAS), st.data())
def test_collapse_after_push1(s, g, data):
    e = data.draw(st.integers(1, s.order))
    pushed = apply_op(s, Push1(g, e))
    if pushed is None:
        # no (e-1)-stack below the top one: only order-1 links are possible
        e, pushed = 1, push1(s, g, 1)
    assert pop(pushed, 1) == s
    assert collapse(pushed) == pop(pushed, e)
    if e == 1:
        assert collapse(pushed) == s
    else:
        assert collapse(pushed) == pop(s, e)
    COUNTS["collapse_push1"] += 1


@PROPERTY
@given(stacks(), st.sampled_from(GAMMAS))
def test_rewrite_preserves_link(s, g):
    if s.top_symbol().e == 0:
        assert apply_op(s, Rew(g)) is None
        s = push1(s, GAMMAS[0], 1)
    r = rewrite_top(s, g)
    assert r.top_symbol().name == g
    assert r.top_symbol()[1:] == s.top_symbol()[1:]
    assert pop(r, 1) == pop(s, 1)
    assert collapse(r) == collapse(s)
    COUNTS["rewrite_link"] += 1


@PROPERTY
@given(stacks_with_op())
def test_operations_keep_links_well_formed(case):
    s, op = case
    out = apply_op(s, op)
    assert s.check_links() == []
    if out is not None:
        assert out.check_links() == []
    COUNTS["links_ok"] += 1


@PROPERTY
@given(stacks_with_op())
def test_shape_commutes_with_operations(case):
    s, op = case
    out = apply_op(s, op)
    shaped = apply_op(stack_shape(s), shape_op(op))
    assert (out is None) == (shaped is None)
    if out is not None:
        assert stack_shape(out) == shaped
    COUNTS["shape"] += 1


# ---------------------------------------------------------------- unfolding


@lru_cache(maxsize=None)
def _unfold(name, depth, steps):
    return unfold_value_tree(load_scheme(name), Budget(depth, steps))


@PROPERTY
@given(
    st.sampled_from(["ex31.hrs", "ex61.hrs", "sec71.hrs"]),
    st.integers(0, 7),
    st.integers(0, 7),
    st.integers(1, 400),
    st.integers(0, 400),
)
def test_unfold_monotone_in_budget(name, d1, d2, steps, extra):
    lo, hi = min(d1, d2), max(d1, d2)
    assert tree_leq(_unfold(name, lo, steps), _unfold(name, hi, steps + extra))
    COUNTS["unfold_monotone"] += 1


# ---------------------------------------------------------------- approximation order


@PROPERTY
@given(tree_chains(), trees())
def test_leq_is_a_partial_order(chain, other):
    t1, t2, t3 = chain
    assert tree_leq(t1, t1) and tree_leq(t1, t2) and tree_leq(t2, t3)
    assert tree_leq(t1, t3)
    if tree_leq(other, t3) and tree_leq(t3, other):
        assert other == t3
    if tree_leq(t2, t1):
        assert t1 == t2
    assert tree_leq(t3.truncate(2), t3)
    COUNTS["leq_order"] += 1


# ---------------------------------------------------------------- three-valued evaluation


@st.composite
def pruned_pairs(draw):
    t = draw(trees(FGA, 4, bottom_rate=10))
    return draw(prunings(t)), t


@PROPERTY
@given(pruned_pairs(), formulas())
def test_eval_bounded_is_monotone(pair, f):
    small, big = pair
    v_small, v_big = eval_bounded(f, small), eval_bounded(f, big)
    for u, v in v_small.items():
        if v in (TRUE, FALSE):
            assert v_big[u] == v
    COUNTS["eval_monotone"] += 1


@PROPERTY
@given(trees(FGA, 4), formulas())
def test_eval_bounded_matches_naive_on_complete_trees(t, f):
    vals = eval_bounded(f, t)
    assert {u for u, v in vals.items() if v == TRUE} == naive_eval(f, t)
    assert {u for u, v in vals.items() if v == FALSE} == set(t.nodes()) - naive_eval(f, t)
    COUNTS["eval_naive"] += 1


# ---------------------------------------------------------------- text formats


@PROPERTY
@given(trees(FGA, 5, bottom_rate=10))
def test_tree_text_round_trip(t):
    assert PartialTree.parse(t.to_text()) == t
    assert first_difference(t, PartialTree.parse(t.to_text())) is None
    COUNTS["tree_text"] += 1


@PROPERTY
@given(formulas(depth=5))
def test_formula_text_round_trip(f):
    assert parse_formula(format_formula(f)) == f
    COUNTS["formula_text"] += 1


@PROPERTY
@given(stacks())
def test_stack_text_round_trip(s):
    assert parse_stack(format_stack(s)) == s
    assert LinkedStack(s.order, s.content) == s
    COUNTS["stack_text"] += 1


@PROPERTY
@given(st.randoms(use_true_random=False))
def test_arena_and_automaton_text_round_trip(rng):
    a = random_arena(rng)
    assert ParityArena.parse(a.to_text()) == a
    aut = random_automaton(rng, FGA)
    assert ParityTreeAutomaton.parse(aut.to_text()) == aut
    COUNTS["machine_text"] += 1


PROPERTIES = [
    ("pop_push", test_pop_after_push),
    ("collapse_push1", test_collapse_after_push1),
    ("rewrite_link", test_rewrite_preserves_link),
    ("links_ok", test_operations_keep_links_well_formed),
    ("shape", test_shape_commutes_with_operations),
    ("unfold_monotone", test_unfold_monotone_in_budget),
    ("leq_order", test_leq_is_a_partial_order),
    ("eval_monotone", test_eval_bounded_is_monotone),
    ("eval_naive", test_eval_bounded_matches_naive_on_complete_trees),
    ("tree_text", test_tree_text_round_trip),
    ("formula_text", test_formula_text_round_trip),
    ("stack_text", test_stack_text_round_trip),
    ("machine_text", test_arena_and_automaton_text_round_trip),
]
