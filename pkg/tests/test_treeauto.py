import random

import pytest

from conftest import fixture_path
from artifact.catalog import (
    CHOICE_ALPHABET,
    RED,
    chase,
    choice_selector,
    first_red,
    first_red_pair_automaton,
    first_red_walker,
    odd_a_automaton,
    root_walker,
)
from artifact.core import PartialTree
from artifact.transforms import pair_alphabet, split_pair_label
from artifact.treeauto import (
    DOWN,
    NO,
    NONE,
    OPTIMISTIC,
    PESSIMISTIC,
    ROOT,
    SELF,
    UNKNOWN,
    YES,
    NotFunctional,
    ParityTreeAutomaton,
    TreeWalkingAutomaton,
    annotate_tree,
    bounded_accepts,
    bounded_table,
    brute_force_select,
    check_run,
    enumerate_runs,
    finite_accepts,
    mark_label,
    pair_relation,
    run_exists,
    select_marking,
    selected_nodes,
    split_mark,
    twa_run,
)
from strategies import FGA, random_automaton, random_tree

RED_TREE = PartialTree.parse(fixture_path("red.tree").read_text())
ODD_A = odd_a_automaton()


def test_odd_a_examples():
    assert finite_accepts(ODD_A, PartialTree.parse("(g (a))"))
    assert not finite_accepts(ODD_A, PartialTree.parse("(g (g (a)))"))
    assert finite_accepts(ODD_A, PartialTree.parse("(g (f (g (a)) (a)))"))
    assert not finite_accepts(ODD_A, PartialTree.parse("(f (a) (a))"))


def test_runs_agree_with_game():
    rng = random.Random(11)
    for _ in range(60):
        aut = random_automaton(rng, FGA)
        t = random_tree(rng, FGA, 7)
        runs = list(enumerate_runs(aut, t))
        assert all(check_run(aut, t, r) for r in runs)
        assert bool(runs) == finite_accepts(aut, t) == run_exists(aut, t)


def test_bounded_acceptance():
    t = PartialTree.parse("(g (⊥))")
    assert bounded_accepts(ODD_A, t, OPTIMISTIC) == YES
    assert bounded_accepts(ODD_A, t, PESSIMISTIC) == NO
    assert bounded_accepts(ODD_A, t) == UNKNOWN
    assert bounded_accepts(ODD_A, PartialTree.parse("(g (a))")) == YES
    assert bounded_accepts(ODD_A, PartialTree.parse("(f (⊥) (⊥))")) == NO
    with pytest.raises(ValueError):
        bounded_accepts(ODD_A, t, "maybe")
    table = bounded_table(ODD_A, t)
    assert table[((), "s")] == UNKNOWN and table[((), "T")] == UNKNOWN


def test_automaton_text_round_trip():
    for name in ("ex64.pta", "choice.pta", "odd_a.pta", "first_red.pta"):
        aut = ParityTreeAutomaton.parse(fixture_path(name).read_text())
        assert ParityTreeAutomaton.parse(aut.to_text()) == aut
    assert ParityTreeAutomaton.parse(fixture_path("odd_a.pta").read_text()) == ODD_A


def test_mark_labels():
    assert mark_label("a", "01") == "a#01"
    assert mark_label("a", "") == "a"
    assert split_mark("a#01") == ("a", "01")
    assert split_mark("a") == ("a", "")


def test_first_red_relation():
    aut = first_red_pair_automaton()
    rel = pair_relation(aut, RED_TREE)
    for u in RED_TREE.nodes():
        target = first_red(RED_TREE, u)
        assert rel[u] == ([] if target is None else [target])


def test_annotation_fields():
    ann = annotate_tree(RED_TREE, [first_red_pair_automaton()])
    assert ann[()].d_up == ROOT
    assert ann[(2, 1)].d_up == 1
    assert ann[(2,)].dirs[0].i == SELF
    assert ann[(2, 2)].dirs[0].i == DOWN
    assert ann[()].dirs[0].i == NONE
    assert ann[()].view("base") == "n"


def test_annotation_rejects_non_functional():
    # accepts every pair of distinct nodes
    alphabet = pair_alphabet(CHOICE_ALPHABET)
    ok = {a: k for a, k in alphabet.items() if split_pair_label(a)[1] != {1, 2}}
    everything = ParityTreeAutomaton(
        ["q"],
        alphabet,
        "q",
        [("q", a, ("q",) * k) for a, k in ok.items() if k],
        {"q": 0},
        [("q", a) for a, k in ok.items() if not k],
    )
    with pytest.raises(NotFunctional):
        annotate_tree(RED_TREE, [everything])


def test_first_red_walker():
    ann = annotate_tree(RED_TREE, [first_red_pair_automaton()])
    w = first_red_walker()
    for u in RED_TREE.nodes():
        res = twa_run(w, ann, u)
        target = first_red(RED_TREE, u)
        if target is None:
            assert res.kind == "rejected"
        else:
            assert res.kind == "accepted" and res.node == target


def test_root_walker_and_fuel():
    ann = annotate_tree(RED_TREE, [])
    for u in RED_TREE.nodes():
        assert twa_run(root_walker(), ann, u).node == ()
    loop = TreeWalkingAutomaton(["q"], "q", [], {("q", "*"): ("q", "stay")})
    assert str(twa_run(loop, RED_TREE, (), fuel=10)) == "exhausted"
    with pytest.raises(ValueError):
        twa_run(loop, RED_TREE, (9,))


def test_walker_text_round_trip():
    for name, w in (("first_red.twa", first_red_walker()), ("root.twa", root_walker())):
        parsed = TreeWalkingAutomaton.parse(fixture_path(name).read_text())
        assert parsed == w
        assert TreeWalkingAutomaton.parse(w.to_text()) == w


def test_choice_selection_on_red_tree():
    marked = select_marking(choice_selector(), RED_TREE, 1)
    assert marked is not None
    for u in RED_TREE.nodes():
        if RED_TREE.children(u):
            end = chase(marked, u)
            assert marked[end].split("#")[0] in RED


def test_selection_matches_enumeration():
    rng = random.Random(5)
    from strategies import random_selector

    for _ in range(40):
        ell = rng.randint(0, 2)
        aut = random_selector(rng, FGA, ell)
        t = random_tree(rng, FGA, 5)
        found = brute_force_select(aut, t, ell)
        marked = select_marking(aut, t, ell)
        assert (marked is None) == (not found)
        if marked is not None:
            assert finite_accepts(aut, marked)
            assert marked in found


def test_selected_nodes():
    t = PartialTree.parse("(f#10 (a#01) (a#11))")
    assert selected_nodes(t) == {(), (2,)}
    assert selected_nodes(t, 1) == {(1,), (2,)}
