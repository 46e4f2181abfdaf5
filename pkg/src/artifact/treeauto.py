"""Parity tree automata on finite trees, bounded acceptance on prefixes,
tree-walking automata, node annotation, and marking selection."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .core import BOTTOM, HocpdaError, Node, PartialTree, node_str
from .games import ABELARD, ELOISE, SINK, ArityMismatch, ParityArena, acceptance_game, solve
from .sexpr import ParseError, dump, parse_all
from .transforms import BULLET, pair_mark

YES, NO, UNKNOWN = "yes", "no", "unknown"
OPTIMISTIC, PESSIMISTIC = "optimistic", "pessimistic"


class NotFunctional(HocpdaError):
    """A pair relation relates one node to several others."""


# ---------------------------------------------------------------- automata


class ParityTreeAutomaton:
    """Nondeterministic top-down parity tree automaton with a leaf table.

    ``transitions`` holds triples ``(q, a, (q1, .., qk))`` with ``k`` the
    arity of ``a``; ``acc`` holds the pairs ``(q, a)`` accepted at leaves.
    """

    def __init__(self, states, alphabet: Mapping[str, int], initial, transitions=(), color=None, acc=()):
        self.states = tuple(dict.fromkeys(states))
        self.alphabet = dict(alphabet)
        self.initial = initial
        self.color = {q: 0 for q in self.states}
        self.color.update(color or {})
        self.acc = frozenset(acc)
        self._delta = {}
        for q, a, qs in transitions:
            qs = tuple(qs)
            if q not in self.color or any(p not in self.color for p in qs):
                raise ValueError(f"unknown state in transition {q} {a} {qs}")
            if a not in self.alphabet:
                raise ValueError(f"unknown letter {a!r}")
            if len(qs) != self.alphabet[a]:
                raise ArityMismatch(f"transition {q} {a} has {len(qs)} targets, arity {self.alphabet[a]}")
            bucket = self._delta.setdefault((q, a), [])
            if qs not in bucket:
                bucket.append(qs)
        if initial not in self.color:
            raise ValueError(f"initial state {initial!r} is not a state")
        if set(self.color) != set(self.states):
            raise ValueError("colour given for an unknown state")
        for q, a in self.acc:
            if q not in self.color or a not in self.alphabet:
                raise ValueError(f"bad leaf acceptance pair ({q}, {a})")

    def transitions_for(self, q, a) -> list[tuple]:
        return self._delta.get((q, a), [])

    @property
    def transitions(self) -> list[tuple]:
        return [(q, a, qs) for (q, a), bucket in self._delta.items() for qs in bucket]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityTreeAutomaton):
            return NotImplemented
        return (
            set(self.states) == set(other.states)
            and self.alphabet == other.alphabet
            and self.initial == other.initial
            and self.color == other.color
            and self.acc == other.acc
            and set(self.transitions) == set(other.transitions)
        )

    def __repr__(self) -> str:
        return f"ParityTreeAutomaton({len(self.states)} states, {len(self.transitions)} transitions)"

    def to_text(self) -> str:
        lines = [
            dump(["states", *self.states]),
            dump(["alphabet", *[[a, str(k)] for a, k in self.alphabet.items()]]),
            dump(["initial", self.initial]),
        ]
        lines += [dump(["color", q, str(self.color[q])]) for q in self.states]
        lines += [dump([q, a, *qs]) for q, a, qs in self.transitions]
        lines += [dump(["acc", q, a]) for q, a in sorted(self.acc)]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ParityTreeAutomaton":
        states, alphabet, initial = [], {}, None
        trans, color, acc = [], {}, []
        for form in parse_all(text):
            if not isinstance(form, list) or not form or isinstance(form[0], list):
                raise ParseError(f"unexpected form {dump(form)}")
            key = form[0]
            if key == "states":
                states.extend(form[1:])
            elif key == "alphabet":
                for entry in form[1:]:
                    alphabet[entry[0]] = int(entry[1])
            elif key == "initial":
                initial = form[1]
            elif key == "color":
                color[form[1]] = int(form[2])
            elif key == "acc":
                acc.append((form[1], form[2]))
            else:
                if len(form) < 2:
                    raise ParseError(f"bad transition {dump(form)}")
                trans.append((form[0], form[1], tuple(form[2:])))
        if initial is None:
            raise ParseError("missing (initial ...)")
        return cls(states, alphabet, initial, trans, color, acc)


# ---------------------------------------------------------------- finite trees


def acceptance_table(aut: ParityTreeAutomaton, t: PartialTree, bottom_color: int | None = None) -> dict:
    """``(u, q) -> bool``: does ``aut`` accept the subtree at ``u`` from state ``q``."""
    arena = acceptance_game(aut, t, bottom_color)
    sol = solve(arena)
    return {(u, q): ("m", u, q) in sol.win_e for u in t.nodes() for q in aut.states}


def finite_accepts(aut: ParityTreeAutomaton, t: PartialTree) -> bool:
    """Acceptance of a finite ⊥-free tree, decided through the parity game."""
    sol = solve(acceptance_game(aut, t))
    return ("m", (), aut.initial) in sol.win_e


def run_exists(aut: ParityTreeAutomaton, t: PartialTree, q=None, u: Node = ()) -> bool:
    """Direct search for an accepting run; on finite trees colours play no part."""

    @lru_cache(maxsize=None)
    def ok(node, state):
        a = t[node]
        if a == BOTTOM:
            raise ValueError("run search needs a tree without ⊥")
        kids = t.children(node)
        if not kids:
            return (state, a) in aut.acc
        return any(all(ok(node + (d,), qd) for d, qd in enumerate(qs, start=1)) for qs in aut.transitions_for(state, a))

    return ok(u, aut.initial if q is None else q)


def enumerate_runs(aut: ParityTreeAutomaton, t: PartialTree):
    """Yield every accepting run as a ``node -> state`` dict. Exponential."""
    nodes = t.nodes()
    for states in itertools.product(aut.states, repeat=len(nodes)):
        run = dict(zip(nodes, states))
        if run[()] != aut.initial:
            continue
        if all(_locally_ok(aut, t, run, u) for u in nodes):
            yield run


def _locally_ok(aut, t, run, u) -> bool:
    a = t[u]
    kids = t.children(u)
    if not kids:
        return (run[u], a) in aut.acc
    return tuple(run[c] for c in kids) in aut.transitions_for(run[u], a)


def check_run(aut: ParityTreeAutomaton, t: PartialTree, run: Mapping) -> bool:
    return run.get(()) == aut.initial and all(_locally_ok(aut, t, run, u) for u in t.nodes())


# ---------------------------------------------------------------- prefixes with ⊥


def bounded_accepts(aut: ParityTreeAutomaton, t: PartialTree, mode: str | None = None):
    """Acceptance on a prefix whose ⊥ leaves are undetermined.

    With ``mode`` set, ⊥ leaves are won by Éloïse (optimistic) or Abelard
    (pessimistic) and the answer is ``yes``/``no`` for that game. Without
    it, the answer is ``yes`` if the pessimistic game is won, ``no`` if the
    optimistic game is lost, and ``unknown`` otherwise.
    """
    if mode is not None:
        if mode not in (OPTIMISTIC, PESSIMISTIC):
            raise ValueError(f"unknown mode {mode!r}")
        sol = solve(acceptance_game(aut, t, 0 if mode == OPTIMISTIC else 1))
        return YES if ("m", (), aut.initial) in sol.win_e else NO
    if bounded_accepts(aut, t, PESSIMISTIC) == YES:
        return YES
    if bounded_accepts(aut, t, OPTIMISTIC) == NO:
        return NO
    return UNKNOWN


def bounded_table(aut: ParityTreeAutomaton, t: PartialTree) -> dict:
    """``(u, q) -> yes/no/unknown`` for every node and state."""
    hi = acceptance_table(aut, t, 0)
    lo = acceptance_table(aut, t, 1)
    return {k: YES if lo[k] else (UNKNOWN if hi[k] else NO) for k in hi}


# ---------------------------------------------------------------- annotation

ROOT = "root"
UP, DOWN, SELF, NONE = "↑", "↓", "↺", "⊥"


class DirInfo(NamedTuple):
    i: str
    R: frozenset
    S: frozenset
    T: frozenset


class AnnotatedNodeLabel(NamedTuple):
    base: str
    d_up: object
    dirs: tuple

    def view(self, field_name: str) -> str:
        if field_name == "base":
            return self.base
        if field_name == "dup":
            return str(self.d_up)
        if field_name.startswith("i") and field_name[1:].isdigit():
            return self.dirs[int(field_name[1:]) - 1].i
        raise KeyError(field_name)


def pair_relation(aut: ParityTreeAutomaton, t: PartialTree) -> dict:
    """``u -> sorted list of v`` with ``aut`` accepting the (u, v)-marked tree."""
    nodes = t.nodes()
    return {u: [v for v in nodes if finite_accepts(aut, pair_mark(t, u, v))] for u in nodes}


def annotate_tree(t: PartialTree, automata: Iterable[ParityTreeAutomaton]) -> PartialTree:
    """The annotated tree t̄: each label becomes an :class:`AnnotatedNodeLabel`.

    ``automata[ℓ-1]`` runs on pair-marked trees and defines the relation
    for direction ℓ. ``i_ℓ`` is ↺ whenever (u, u) is accepted; otherwise
    two or more partners raise :class:`NotFunctional`.
    """
    automata = list(automata)
    if t.has_bottom():
        raise ValueError("annotation needs a tree without ⊥")
    per_dir = []
    for aut in automata:
        rel = pair_relation(aut, t)
        plain = acceptance_table(aut, pair_mark(t, BULLET, BULLET))
        below_v = {v: acceptance_table(aut, pair_mark(t, BULLET, v)) for v in t.nodes()}
        per_dir.append((aut, rel, plain, below_v))

    def info(u, aut, rel, plain, below_v):
        partners = rel[u]
        if u in partners:
            i = SELF
        elif not partners:
            i = NONE
        elif len(partners) > 1:
            raise NotFunctional(f"node {node_str(u)} is related to {len(partners)} nodes")
        else:
            v = partners[0]
            i = DOWN if v[: len(u)] == u else UP
        R = frozenset(q for q in aut.states if plain[(u, q)])
        S, T = set(), set()
        for c in t.children(u):
            d = c[-1]
            for q in aut.states:
                if plain[(c, q)]:
                    S.add((d, q))
                if any(below_v[v][(c, q)] for v in t.nodes() if v[: len(c)] == c):
                    T.add((d, q))
        return DirInfo(i, R, frozenset(S), frozenset(T))

    labels = {}
    for u, a in t.items():
        dirs = tuple(info(u, *entry) for entry in per_dir)
        labels[u] = AnnotatedNodeLabel(a, u[-1] if u else ROOT, dirs)
    return PartialTree(labels)


# ---------------------------------------------------------------- tree walking

STAY, MOVE_UP = "stay", "up"


class TwaResult(NamedTuple):
    kind: str
    node: Node | None = None
    steps: int = 0

    def __str__(self) -> str:
        if self.kind == "accepted":
            return f"accepted-at {node_str(self.node)}"
        return self.kind


class TreeWalkingAutomaton:
    """Deterministic tree-walking automaton.

    A node label is seen through ``reads``: the listed fields of an
    annotated label joined by ``|``, or the label itself for plain trees.
    Transition patterns may use ``*`` for a whole label or per field.
    """

    def __init__(self, states, initial, final, delta: Mapping, reads=("base",)):
        self.states = tuple(dict.fromkeys(states))
        self.initial = initial
        self.final = frozenset(final)
        self.reads = tuple(reads)
        self.delta = {}
        for (q, pattern), (q2, move) in delta.items():
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"unknown state in transition from {q!r}")
            if move not in (STAY, MOVE_UP) and not (isinstance(move, int) and move >= 1):
                raise ValueError(f"bad move {move!r}")
            self.delta[(q, pattern)] = (q2, move)
        if initial not in self.states:
            raise ValueError("initial state is not a state")

    def see(self, label) -> str:
        if isinstance(label, AnnotatedNodeLabel):
            return "|".join(label.view(f) for f in self.reads)
        return label

    def lookup(self, q, label):
        seen = self.see(label)
        hit = self.delta.get((q, seen))
        if hit is not None:
            return hit
        parts = seen.split("|")
        for (p, pattern), target in self.delta.items():
            if p != q:
                continue
            pp = pattern.split("|")
            if pattern == "*" or (len(pp) == len(parts) and all(x in ("*", y) for x, y in zip(pp, parts))):
                return target
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, TreeWalkingAutomaton):
            return NotImplemented
        return (
            set(self.states) == set(other.states)
            and self.initial == other.initial
            and self.final == other.final
            and self.reads == other.reads
            and self.delta == other.delta
        )

    def to_text(self) -> str:
        lines = [
            dump(["states", *self.states]),
            dump(["initial", self.initial]),
            dump(["final", *sorted(self.final)]),
            dump(["reads", *self.reads]),
        ]
        for (q, pattern), (q2, move) in self.delta.items():
            lines.append(dump([q, pattern, q2, str(move)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "TreeWalkingAutomaton":
        states, initial, final, reads, delta = [], None, [], ("base",), {}
        for form in parse_all(text):
            if not isinstance(form, list) or not form:
                raise ParseError(f"unexpected form {dump(form)}")
            key = form[0]
            if key == "states":
                states.extend(form[1:])
            elif key == "initial":
                initial = form[1]
            elif key == "final":
                final.extend(form[1:])
            elif key == "reads":
                reads = tuple(form[1:])
            elif len(form) == 4:
                move = form[3]
                if move.isdigit():
                    move = int(move)
                delta[(form[0], form[1])] = (form[2], move)
            else:
                raise ParseError(f"bad transition {dump(form)}")
        if initial is None:
            raise ParseError("missing (initial ...)")
        return cls(states, initial, final, delta, reads)


def twa_run(w: TreeWalkingAutomaton, t: PartialTree, start: Node = (), fuel: int | None = None) -> TwaResult:
    """Run ``w`` from ``start`` until it reaches a final state, gets stuck, or runs out of fuel."""
    if start not in t:
        raise ValueError(f"start node {node_str(start)} is not in the tree")
    if fuel is None:
        fuel = 4 * len(t) * len(w.states)
    q, u = w.initial, start
    for steps in range(fuel + 1):
        if q in w.final:
            return TwaResult("accepted", u, steps)
        if steps == fuel:
            break
        hit = w.lookup(q, t[u])
        if hit is None:
            return TwaResult("rejected", u, steps)
        q, move = hit
        if move == MOVE_UP:
            if not u:
                return TwaResult("rejected", u, steps)
            u = u[:-1]
        elif move != STAY:
            child = u + (move,)
            if child not in t:
                return TwaResult("rejected", u, steps)
            u = child
    return TwaResult("exhausted", u, fuel)


# ---------------------------------------------------------------- selection


def mark_label(a: str, bits) -> str:
    bits = "".join(str(int(b)) for b in bits)
    return f"{a}#{bits}" if bits else a


def split_mark(label: str) -> tuple[str, str]:
    base, sep, bits = label.rpartition("#")
    return (base, bits) if sep else (label, "")


def marked_alphabet(alphabet: Mapping[str, int], ell: int) -> dict:
    """Σ×{0,1}^ℓ as ``label#bits`` names."""
    out = {}
    for a, k in alphabet.items():
        if a == BOTTOM:
            continue
        for bits in itertools.product("01", repeat=ell):
            out[mark_label(a, bits)] = k
    return out


def apply_marking(t: PartialTree, marking: Mapping[Node, str]) -> PartialTree:
    return t.relabel(lambda u, a: mark_label(a, marking[u]))


def selection_game(aut: ParityTreeAutomaton, t: PartialTree, ell: int) -> ParityArena:
    """Acceptance game where Éloïse picks the bit vector together with the transition."""
    if t.has_bottom():
        raise ValueError("selection needs a tree without ⊥")
    top = max(aut.color.values(), default=0)
    vectors = ["".join(b) for b in itertools.product("01", repeat=ell)]
    vertices, edges = [], []
    need_sink = False
    for u in t.nodes():
        a = t[u]
        kids = t.children(u)
        for q in aut.states:
            main = ("m", u, q)
            vertices.append((main, ELOISE, aut.color[q]))
            moves = 0
            for bits in vectors:
                label = mark_label(a, bits)
                if label not in aut.alphabet:
                    continue
                if aut.alphabet[label] != len(kids):
                    raise ArityMismatch(f"node {node_str(u)} labelled {a} has {len(kids)} children")
                if not kids:
                    leaf = ("l", u, q, bits)
                    vertices.append((leaf, ELOISE, 0 if (q, label) in aut.acc else 1))
                    edges.append((main, leaf))
                    edges.append((leaf, leaf))
                    moves += 1
                    continue
                for i, qs in enumerate(aut.transitions_for(q, label)):
                    mid = ("t", u, q, bits, i)
                    vertices.append((mid, ABELARD, top))
                    edges.append((main, mid))
                    for d, qd in enumerate(qs, start=1):
                        edges.append((mid, ("m", u + (d,), qd)))
                    moves += 1
            if not moves:
                need_sink = True
                edges.append((main, SINK))
    if need_sink:
        vertices.append((SINK, ELOISE, 1))
        edges.append((SINK, SINK))
    return ParityArena(vertices, edges)


def select_marking(aut: ParityTreeAutomaton, t: PartialTree, ell: int) -> PartialTree | None:
    """A marked tree accepted by ``aut``, read off Éloïse's winning strategy, or None."""
    arena = selection_game(aut, t, ell)
    sol = solve(arena)
    root = ("m", (), aut.initial)
    if root not in sol.win_e:
        return None
    marking = {}
    todo = [root]
    while todo:
        v = todo.pop()
        _, u, _q = v
        choice = sol.strategy_e[v]
        marking[u] = choice[3]
        if choice[0] == "t":
            todo.extend(arena.successors(choice))
    marked = apply_marking(t, marking)
    assert run_exists(aut, marked), "extracted marking is not accepted"
    return marked


def all_markings(t: PartialTree, ell: int):
    """Every assignment of ℓ-bit vectors to the nodes of ``t``."""
    nodes = t.nodes()
    vectors = ["".join(b) for b in itertools.product("01", repeat=ell)]
    for combo in itertools.product(vectors, repeat=len(nodes)):
        yield dict(zip(nodes, combo))


def _marked_runs(aut, t, ell, u):
    """Every marking of the subtree at ``u`` with the states accepting it."""
    vectors = ["".join(b) for b in itertools.product("01", repeat=ell)]
    kids = t.children(u)
    below = [_marked_runs(aut, t, ell, c) for c in kids]
    out = []
    for bits in vectors:
        label = mark_label(t[u], bits)
        for combo in itertools.product(*below):
            if not kids:
                states = frozenset(q for q in aut.states if (q, label) in aut.acc)
            else:
                states = frozenset(
                    q
                    for q in aut.states
                    if any(all(qd in combo[d][1] for d, qd in enumerate(qs)) for qs in aut.transitions_for(q, label))
                )
            marking = ((u, bits),) + tuple(pair for m, _ in combo for pair in m)
            out.append((marking, states))
    return out


def brute_force_select(aut: ParityTreeAutomaton, t: PartialTree, ell: int) -> list[PartialTree]:
    """All accepted markings, by enumerating every one of the 2^(ℓ·|t|) markings."""
    found = []
    for marking, states in _marked_runs(aut, t, ell, ()):
        if aut.initial in states:
            found.append(apply_marking(t, dict(marking)))
    return found


def selected_nodes(marked: PartialTree, bit: int = 0) -> set:
    """Nodes whose bit number ``bit`` (0-based) is set."""
    out = set()
    for u, label in marked.items():
        _, bits = split_mark(label)
        if len(bits) > bit and bits[bit] == "1":
            out.add(u)
    return out


__all__ = [
    "ParityTreeAutomaton",
    "TreeWalkingAutomaton",
    "AnnotatedNodeLabel",
    "DirInfo",
    "TwaResult",
    "NotFunctional",
    "acceptance_table",
    "finite_accepts",
    "run_exists",
    "enumerate_runs",
    "check_run",
    "bounded_accepts",
    "bounded_table",
    "annotate_tree",
    "pair_relation",
    "twa_run",
    "mark_label",
    "split_mark",
    "marked_alphabet",
    "apply_marking",
    "selection_game",
    "select_marking",
    "all_markings",
    "brute_force_select",
    "selected_nodes",
]
