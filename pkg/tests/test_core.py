import pytest

from artifact.core import (
    BOTTOM,
    NONTERMINAL,
    TERMINAL,
    ArgumentTypeMismatch,
    O,
    PartialTree,
    RankedAlphabet,
    Sym,
    UnboundSymbol,
    app,
    arrow,
    first_difference,
    infer_type,
    node_str,
    parse_node,
    tree_leq,
    trees_compatible,
    type_arity,
    type_from_sexpr,
    type_order,
    type_to_sexpr,
)
from artifact.sexpr import ParseError, parse_one


def test_order_examples():
    assert type_order(O) == 0
    assert type_order(arrow(O, O, O, O)) == 1
    assert type_order(arrow(arrow(arrow(O, O), O), O)) == 3


def test_arrows_associate_right():
    assert arrow(O, O, O) == arrow(O, arrow(O, O))
    assert type_arity(arrow(O, O, O)) == 2


def test_type_text_round_trip():
    t = arrow(arrow(O, O), arrow(O, O), O)
    assert type_from_sexpr(type_to_sexpr(t)) == t
    assert type_from_sexpr(parse_one("(-> (-> o o) o o)")) == arrow(arrow(O, O), O, O)


def test_infer_type_example_rule():
    oo = arrow(O, O)
    env = {"F": arrow(oo, oo, O), "b": oo, "c": oo, "Cp": arrow(oo, oo, O, O)}
    F, b, c, cp = Sym("F", NONTERMINAL), Sym("b", TERMINAL), Sym("c", TERMINAL), Sym("Cp", NONTERMINAL)
    assert infer_type(app(F, b, c), env) == O
    phi = Sym("phi", "variable")
    assert infer_type(app(cp, b, phi), {**env, "phi": oo}) == oo


def test_infer_type_errors():
    a = Sym("a", TERMINAL)
    with pytest.raises(ArgumentTypeMismatch):
        infer_type(app(a, a), {"a": O})
    with pytest.raises(UnboundSymbol):
        infer_type(Sym("zz", TERMINAL), {})


def test_terms_are_interned():
    a = Sym("a", TERMINAL)
    f = Sym("f", TERMINAL)
    assert app(f, a, a) is app(f, a, a)


def test_ranked_alphabet_has_bottom():
    sigma = RankedAlphabet({"f": 2, "a": 0})
    assert sigma[BOTTOM] == 0
    assert sigma.max_arity == 2
    with pytest.raises(ValueError):
        RankedAlphabet({BOTTOM: 1})


def test_tree_text_round_trip():
    text = "(f (a) (f (a) (⊥)))"
    t = PartialTree.parse(text)
    assert t.to_text() == text
    assert t[(2, 2)] == BOTTOM
    assert t.children(()) == [(1,), (2,)]


def test_tree_invariants():
    with pytest.raises(ValueError):
        PartialTree({(1,): "a"})
    with pytest.raises(ValueError):
        PartialTree({(): BOTTOM, (1,): "a"})
    with pytest.raises(ParseError):
        PartialTree.parse("((a))")


def test_check_ranked():
    t = PartialTree.parse("(f (a))")
    assert t.check_ranked({"f": 2, "a": 0, BOTTOM: 0})
    assert not PartialTree.parse("(f (a) (⊥))").check_ranked({"f": 2, "a": 0, BOTTOM: 0})


def test_tree_leq_examples():
    big = PartialTree.parse("(f (a) (f (a) (⊥)))")
    assert tree_leq(PartialTree.leaf(), big)
    assert tree_leq(big, big)
    assert tree_leq(PartialTree.parse("(f (⊥) (⊥))"), big)
    assert not tree_leq(big, PartialTree.parse("(f (⊥) (⊥))"))
    assert trees_compatible(PartialTree.parse("(f (⊥) (a))"), PartialTree.parse("(f (a) (⊥))"))


def test_truncate_keeps_nullary_labels():
    t = PartialTree.parse("(f (a) (f (a) (a)))")
    assert t.truncate(1).to_text() == "(f (a) (⊥))"
    assert t.truncate(0).to_text() == "(⊥)"


def test_first_difference():
    t1 = PartialTree.parse("(f (a) (g (a)))")
    t2 = PartialTree.parse("(f (a) (g (b)))")
    assert first_difference(t1, t2) == ((2, 1), "a", "b")
    assert first_difference(t1, t1) is None


def test_node_text():
    assert node_str(()) == "ε"
    assert node_str((1, 2)) == "12"
    assert parse_node("12") == (1, 2)
    assert parse_node(node_str((1, 11))) == (1, 11)
