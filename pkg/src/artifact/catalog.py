"""Hand-built automata for the worked examples shipped as fixtures."""

from __future__ import annotations

import itertools

from .transforms import pair_label
from .treeauto import ParityTreeAutomaton, TreeWalkingAutomaton, mark_label

# ---------------------------------------------------------------- odd path to an a


def odd_a_automaton() -> ParityTreeAutomaton:
    """Over f:2 g:1 a:0: the node is a g and some 1^k with k odd is labelled a."""
    alphabet = {"f": 2, "g": 1, "a": 0}
    nxt = {"o": "e", "e": "o", "s": "o"}
    trans = [("T", "f", ("T", "T")), ("T", "g", ("T",))]
    for q in ("o", "e"):
        trans.append((q, "f", (nxt[q], "T")))
        trans.append((q, "g", (nxt[q],)))
    trans.append(("s", "g", ("o",)))
    color = {"s": 1, "o": 1, "e": 1, "T": 0}
    acc = [("o", "a"), ("T", "a")]
    return ParityTreeAutomaton(["s", "o", "e", "T"], alphabet, "s", trans, color, acc)


# ---------------------------------------------------------------- odd-g selection


def _ex64_name(rs, E, U) -> str:
    return f"{rs}:{''.join(sorted(E))}:{''.join(sorted(U))}"


def odd_g_selector() -> ParityTreeAutomaton:
    """One-bit selector: the bit is 1 exactly at right sons of f-nodes from
    which some path down to an a-leaf meets an odd number of g's.

    States ``rs:E:U``. ``rs`` says the node is a right son of an f. ``E``
    holds parities still to be realised by some path below, ``U`` parities
    no path may realise; parities count g's from the current node inclusive.
    """
    subsets = [frozenset(), frozenset("0"), frozenset("1"), frozenset("01")]
    flip = {"0": "1", "1": "0"}
    states, trans, acc, color = [], [], [], {}
    for rs, E, U in itertools.product("01", subsets, subsets):
        q = _ex64_name(rs, E, U)
        states.append(q)
        color[q] = 1 if E else 0
        for bit in "01":
            if bit == "1" and rs == "0":
                continue
            E2, U2 = set(E), set(U)
            if rs == "1":
                (E2 if bit == "1" else U2).add("1")
            g_child = _ex64_name("0", {flip[p] for p in E2}, {flip[p] for p in U2})
            trans.append((q, mark_label("g", bit), (g_child,)))
            E2 = sorted(E2)
            for sides in itertools.product((1, 2), repeat=len(E2)):
                left = {p for p, s in zip(E2, sides) if s == 1}
                right = {p for p, s in zip(E2, sides) if s == 2}
                kids = (_ex64_name("0", left, U2), _ex64_name("1", right, U2))
                trans.append((q, mark_label("f", bit), kids))
            if set(E2) <= {"0"} and "0" not in U2:
                acc.append((q, mark_label("a", bit)))
    alphabet = {mark_label(a, b): k for a, k in (("f", 2), ("g", 1), ("a", 0)) for b in "01"}
    return ParityTreeAutomaton(states, alphabet, _ex64_name("0", (), ()), trans, color, acc)


# ---------------------------------------------------------------- choice function

RED = ("r", "r0")
CHOICE_ALPHABET = {"r": 2, "n": 2, "r0": 0, "n0": 0}


def choice_selector() -> ParityTreeAutomaton:
    """One-bit selector for a choice function: bit 1 means follow the left
    child, bit 0 the right one; from every non-leaf node the chase must end
    at a red node. ``H`` marks a node on a pending chase.
    """
    trans, acc = [], []
    for q in ("N", "H"):
        for bit in "01":
            trans.append((q, mark_label("r", bit), ("N", "N")))
            trans.append((q, mark_label("n", bit), ("H", "N") if bit == "1" else ("N", "H")))
            acc.append((q, mark_label("r0", bit)))
        acc.append(("N", mark_label("n0", "0")))
        acc.append(("N", mark_label("n0", "1")))
    alphabet = {mark_label(a, b): k for a, k in CHOICE_ALPHABET.items() for b in "01"}
    return ParityTreeAutomaton(["N", "H"], alphabet, "N", trans, {"N": 0, "H": 1}, acc)


def chase(marked, start):
    """Follow the bits of a choice marking from ``start``; returns the end node."""
    u = start
    while True:
        base, bits = marked[u].rsplit("#", 1)
        if base in RED or not marked.children(u):
            return u
        u = u + (1 if bits == "1" else 2,)


# ---------------------------------------------------------------- first red node


def first_red_pair_automaton() -> ParityTreeAutomaton:
    """On pair-marked trees over r/n/r0/n0: y is the first red node on the
    leftmost path starting at x (x itself included)."""

    def moves(q, a, X):
        red = a in RED
        k = CHOICE_ALPHABET[a]
        zs = ("Z",) * k
        if q == "Z":
            return [zs] if not X else []
        if q == "W":
            if 1 in X:
                return []
            if 2 in X:
                return [zs] if red else []
            return [("W",) + zs[1:]] if not red and k else []
        # q == "S"
        if 1 in X:
            if 2 in X:
                return [zs] if red else []
            return [("W",) + zs[1:]] if not red and k else []
        if 2 in X:
            return []
        return [tuple("S" if i == d else "Z" for i in range(k)) for d in range(k)]

    alphabet, trans, acc = {}, [], []
    for a, k in CHOICE_ALPHABET.items():
        for X in ((), (1,), (2,), (1, 2)):
            label = pair_label(a, X)
            alphabet[label] = k
            for q in ("S", "W", "Z"):
                for qs in moves(q, a, set(X)):
                    if k:
                        trans.append((q, label, qs))
                    else:
                        acc.append((q, label))
    return ParityTreeAutomaton(["S", "W", "Z"], alphabet, "S", trans, {"S": 1, "W": 1, "Z": 0}, acc)


def first_red(t, u):
    """Direct computation: first red node on the leftmost path from ``u``."""
    while t[u] not in RED:
        if not t.children(u):
            return None
        u = u + (1,)
    return u


def first_red_walker() -> TreeWalkingAutomaton:
    """Reads i_1 and the base label; walks down direction 1 to the partner."""
    delta = {
        ("q0", "↺|*"): ("acc", "stay"),
        ("q0", "↓|*"): ("down", 1),
        ("down", "*|r"): ("acc", "stay"),
        ("down", "*|r0"): ("acc", "stay"),
        ("down", "*|n"): ("down", 1),
    }
    return TreeWalkingAutomaton(["q0", "down", "acc"], "q0", ["acc"], delta, reads=("i1", "base"))


def root_walker() -> TreeWalkingAutomaton:
    """Reads d_up and climbs to the root."""
    delta = {("q0", "root"): ("acc", "stay"), ("q0", "*"): ("q0", "up")}
    return TreeWalkingAutomaton(["q0", "acc"], "q0", ["acc"], delta, reads=("dup",))
