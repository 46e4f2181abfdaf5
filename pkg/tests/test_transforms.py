import pytest

from conftest import load_scheme
from artifact.core import BOTTOM, PartialTree, Sym, TERMINAL, app, term_to_text
from artifact.hors import Budget, Scheme, unfold_value_tree
from artifact.transforms import (
    BOX,
    BULLET,
    TICK,
    InvalidMark,
    NodeOutOfDomain,
    SymbolClash,
    contract_ticks,
    eliminate_divergence,
    erase_pair_marks,
    erase_ticks,
    frontier_tick_marks,
    pair_label,
    pair_mark,
    split_pair_label,
    tick_transform,
    tick_unfold,
)

SEC71 = load_scheme("sec71.hrs")


def test_tick_transform_wraps_bodies():
    s = tick_transform(SEC71)
    assert s.terminals[TICK] == 1
    for rule in s.rules:
        assert term_to_text(rule.body).startswith(f"({TICK} ")
    with pytest.raises(SymbolClash):
        tick_transform(s)
    assert Scheme.parse(s.to_text()) == s


def test_erase_ticks():
    at, f, a = Sym(TICK, TERMINAL), Sym("f", TERMINAL), Sym("a", TERMINAL)
    term = app(at, app(f, app(at, app(at, a)), a))
    assert erase_ticks(term) == app(f, a, a)


def test_tick_unfold_marks_divergence():
    t, marks = tick_unfold(tick_transform(SEC71), SEC71, Budget(3, 500))
    assert marks == {(1, 1)}
    assert t[(1, 1)] == TICK and t[(1, 1, 1)] == BOTTOM


def test_eliminate_divergence_example():
    t = eliminate_divergence(SEC71, Budget(4, 2000))
    assert t.to_text() == f"(f ({BOX}) (f (a) (f (a) (f (a) (⊥)))))"


def test_elimination_without_divergence_is_plain_unfold():
    s = load_scheme("ex31.hrs")
    b = Budget(7, 10_000)
    assert eliminate_divergence(s, b) == unfold_value_tree(s, b)


def test_contract_ticks():
    t = PartialTree.parse("(@ (f (@ (@ (a))) (@ (⊥))))")
    assert contract_ticks(t).to_text() == "(f (a) (⊥))"
    assert contract_ticks(t, {(1, 2)}).to_text() == f"(f (a) ({BOX}))"
    assert frontier_tick_marks(t) == {(1, 2)}
    with pytest.raises(InvalidMark):
        contract_ticks(t, {(1,)})


def test_pair_marking():
    t = PartialTree.parse("(f (a) (a))")
    m = pair_mark(t, (1,), (1,))
    assert m[(1,)] == "a{12}" and m[()] == "f{}"
    assert pair_mark(t, (), (2,))[(2,)] == "a{2}"
    assert pair_mark(t)[()] == "f{}"
    assert erase_pair_marks(m) == t
    assert split_pair_label(pair_label("a", (2, 1))) == ("a", frozenset({1, 2}))
    with pytest.raises(NodeOutOfDomain):
        pair_mark(t, (3,), BULLET)
    with pytest.raises(ValueError):
        split_pair_label("a")

