"""Modal μ-calculus: syntax, three-valued evaluation on finite prefixes and
graphs, the silent-step translation, and reflection marking."""

from __future__ import annotations

import itertools
import re
from typing import Mapping, NamedTuple

from .core import BOTTOM, HocpdaError, PartialTree, node_str
from .cpda import EPS, Cpda, config_graph, generate_tree
from .hors import Budget, Scheme, unfold_value_tree

TRUE, FALSE, UNKNOWN = "true", "false", "unknown"
BAR = "'"


class NonPositiveFixpoint(HocpdaError):
    pass


class FormulaSyntaxError(HocpdaError, ValueError):
    pass


# ---------------------------------------------------------------- syntax


class Const(NamedTuple):
    value: bool


class Prop(NamedTuple):
    label: str


class Var(NamedTuple):
    name: str


class Not(NamedTuple):
    body: object


class And(NamedTuple):
    left: object
    right: object


class Or(NamedTuple):
    left: object
    right: object


class Dia(NamedTuple):
    dir: str
    body: object


class Box(NamedTuple):
    dir: str
    body: object


class Mu(NamedTuple):
    var: str
    body: object


class Nu(NamedTuple):
    var: str
    body: object


T, F = Const(True), Const(False)

_TOKEN = re.compile(r"\s*(?:(<[^>\s]+>|\[[^\]\s]+\])|([()~&|.])|([^\s()~&|.<>\[\]]+))")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"cannot read formula at {text[pos:]!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_formula(text: str):
    """Parse ``pa ~ & | <d> [d] <eps> mu X . nu X . true false ( )``.

    ``&`` binds tighter than ``|``; prefix operators bind tightest, and a
    fixpoint body extends as far right as possible. An identifier is a
    variable when bound by an enclosing fixpoint, otherwise ``p<label>``.
    """
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise FormulaSyntaxError("unexpected end of formula")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    def disj(bound):
        f = conj(bound)
        while peek() == "|":
            take()
            f = Or(f, conj(bound))
        return f

    def conj(bound):
        f = unary(bound)
        while peek() == "&":
            take()
            f = And(f, unary(bound))
        return f

    def unary(bound):
        tok = peek()
        if tok == "~":
            take()
            return Not(unary(bound))
        if tok is not None and tok.startswith("<"):
            take()
            return Dia(tok[1:-1], unary(bound))
        if tok is not None and tok.startswith("["):
            take()
            return Box(tok[1:-1], unary(bound))
        if tok in ("mu", "nu"):
            take()
            var = take()
            if not re.fullmatch(r"[A-Za-z_]\w*", var) or var in ("mu", "nu", "true", "false"):
                raise FormulaSyntaxError(f"bad fixpoint variable {var!r}")
            take(".")
            body = disj(bound | {var})
            return (Mu if tok == "mu" else Nu)(var, body)
        return atom(bound)

    def atom(bound):
        tok = take()
        if tok == "(":
            f = disj(bound)
            take(")")
            return f
        if tok == "true":
            return T
        if tok == "false":
            return F
        if tok in bound:
            return Var(tok)
        if tok.startswith("p") and len(tok) > 1:
            return Prop(tok[1:])
        raise FormulaSyntaxError(f"unbound identifier {tok!r}")

    f = disj(frozenset())
    if pos != len(toks):
        raise FormulaSyntaxError(f"trailing input at {toks[pos]!r}")
    check_positive(f)
    return f


_PREC = {Or: 1, And: 2}


def format_formula(f) -> str:
    """Canonical text; ``parse_formula(format_formula(f)) == f``."""

    def go(f, ctx):
        kind = type(f)
        if kind is Const:
            return "true" if f.value else "false"
        if kind is Prop:
            return "p" + f.label
        if kind is Var:
            return f.name
        if kind in (Or, And):
            op = " | " if kind is Or else " & "
            p = _PREC[kind]
            s = go(f.left, p) + op + go(f.right, p + 1)
            return f"({s})" if ctx > p else s
        if kind is Not:
            return "~" + go(f.body, 3)
        if kind is Dia:
            return f"<{f.dir}> " + go(f.body, 3)
        if kind is Box:
            return f"[{f.dir}] " + go(f.body, 3)
        if kind in (Mu, Nu):
            s = f"{'mu' if kind is Mu else 'nu'} {f.var} . " + go(f.body, 0)
            return f"({s})" if ctx > 0 else s
        raise TypeError(f"not a formula: {f!r}")

    return go(f, 0)


def free_vars(f) -> set:
    kind = type(f)
    if kind is Var:
        return {f.name}
    if kind in (Const, Prop):
        return set()
    if kind in (Mu, Nu):
        return free_vars(f.body) - {f.var}
    if kind in (And, Or):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body)


def check_positive(f) -> None:
    """Raise :class:`NonPositiveFixpoint` if a bound variable occurs under an odd number of negations."""

    def go(f, polarity: dict):
        kind = type(f)
        if kind is Var:
            if polarity.get(f.name) is False:
                raise NonPositiveFixpoint(f"{f.name} occurs negatively")
        elif kind is Not:
            go(f.body, {x: not p for x, p in polarity.items()})
        elif kind in (And, Or):
            go(f.left, polarity)
            go(f.right, polarity)
        elif kind in (Dia, Box):
            go(f.body, polarity)
        elif kind in (Mu, Nu):
            go(f.body, {**polarity, f.var: True})

    go(f, {})


def subformulas(f):
    yield f
    kind = type(f)
    if kind in (And, Or):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif kind in (Not, Dia, Box, Mu, Nu):
        yield from subformulas(f.body)


def _fresh(f, stem="E"):
    used = {g.var for g in subformulas(f) if type(g) in (Mu, Nu)} | free_vars(f)
    for i in itertools.count():
        name = f"{stem}{i}"
        if name not in used:
            used.add(name)
            yield name


def eps_translate(f):
    """Let every ``<a>`` (and ``[a]``) first follow any number of silent edges.

    ``<a> ψ`` becomes ``mu X . (<a> ψ | <eps> X)`` and ``[a] ψ`` becomes
    ``nu X . ([a] ψ & [eps] X)``, rewriting from the outside in.
    """
    names = _fresh(f)

    def go(f):
        kind = type(f)
        if kind in (Const, Prop, Var):
            return f
        if kind is Not:
            return Not(go(f.body))
        if kind in (And, Or):
            return kind(go(f.left), go(f.right))
        if kind in (Mu, Nu):
            return kind(f.var, go(f.body))
        if f.dir == EPS:
            return kind(f.dir, go(f.body))
        x = next(names)
        if kind is Dia:
            return Mu(x, Or(Dia(f.dir, go(f.body)), Dia(EPS, Var(x))))
        return Nu(x, And(Box(f.dir, go(f.body)), Box(EPS, Var(x))))

    return go(f)


def translate_predicates(f, labeling: Mapping[str, str]):
    """Replace each ``p_a`` by the disjunction of ``p_q`` over states with ``labeling[q] = a``."""
    by_label = {}
    for q, a in labeling.items():
        by_label.setdefault(a, []).append(q)

    def go(f):
        kind = type(f)
        if kind is Prop:
            states = by_label.get(f.label, [])
            if not states:
                return F
            out = Prop(states[0])
            for q in states[1:]:
                out = Or(out, Prop(q))
            return out
        if kind in (Const, Var):
            return f
        if kind is Not:
            return Not(go(f.body))
        if kind in (And, Or):
            return kind(go(f.left), go(f.right))
        if kind in (Mu, Nu):
            return kind(f.var, go(f.body))
        return kind(f.dir, go(f.body))

    return go(f)


# ---------------------------------------------------------------- models


class FiniteModel:
    """Finite deterministic edge-labelled graph with node labels.

    ``unknown`` nodes are placeholders for material beyond the prefix: their
    label and successors are undetermined.
    """

    def __init__(self, nodes, label: Mapping, succ: Mapping, unknown=()):
        self.nodes = list(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.label = dict(label)
        self.succ = {v: dict(succ.get(v, {})) for v in self.nodes}
        self.unknown = frozenset(unknown)
        n = len(self.nodes)
        self.full = (1 << n) - 1
        self.unknown_mask = 0
        for v in self.unknown:
            self.unknown_mask |= 1 << self.index[v]
        self._edges = {}
        for v, out in self.succ.items():
            for d, w in out.items():
                self._edges.setdefault(d, []).append((self.index[v], self.index[w]))
        self._prop = {}
        for v, a in self.label.items():
            if v not in self.unknown:
                self._prop[a] = self._prop.get(a, 0) | (1 << self.index[v])

    @classmethod
    def from_tree(cls, t: PartialTree) -> "FiniteModel":
        nodes = t.nodes()
        succ = {u: {str(c[-1]): c for c in t.children(u)} for u in nodes}
        unknown = [u for u in nodes if t[u] == BOTTOM]
        return cls(nodes, dict(t.items()), succ, unknown)

    @classmethod
    def from_cpda(cls, m: Cpda, max_nodes: int = 2_000) -> "FiniteModel":
        """Raw configuration graph; a configuration is labelled by its state."""
        nodes, edges, truncated = config_graph(m, max_nodes)
        label = {c: c.state for c in nodes}
        return cls(nodes, label, edges, truncated)

    def prop(self, a: str) -> int:
        return self._prop.get(a, 0)

    def dia(self, d: str, mask: int) -> int:
        out = 0
        for v, w in self._edges.get(d, ()):
            if mask >> w & 1:
                out |= 1 << v
        return out

    def box(self, d: str, mask: int) -> int:
        bad = 0
        for v, w in self._edges.get(d, ()):
            if not mask >> w & 1:
                bad |= 1 << v
        return self.full & ~bad


def eval_pair(f, model: FiniteModel, env=None) -> tuple[int, int]:
    """``(must, may)`` bitmasks: nodes where ``f`` surely holds / possibly holds."""
    env = env or {}
    unk = model.unknown_mask
    full = model.full
    kind = type(f)
    if kind is Const:
        return (full, full) if f.value else (0, 0)
    if kind is Var:
        return env[f.name]
    if kind is Prop:
        p = model.prop(f.label)
        return p, p | unk
    if kind is Not:
        must, may = eval_pair(f.body, model, env)
        return full & ~may, full & ~must
    if kind in (And, Or):
        l1, h1 = eval_pair(f.left, model, env)
        l2, h2 = eval_pair(f.right, model, env)
        return (l1 & l2, h1 & h2) if kind is And else (l1 | l2, h1 | h2)
    if kind in (Dia, Box):
        must, may = eval_pair(f.body, model, env)
        op = model.dia if kind is Dia else model.box
        return op(f.dir, must) & ~unk, op(f.dir, may) | unk
    if kind in (Mu, Nu):
        cur = (0, 0) if kind is Mu else (full, full)
        while True:
            nxt = eval_pair(f.body, model, {**env, f.var: cur})
            if nxt == cur:
                return cur
            cur = nxt
    raise TypeError(f"not a formula: {f!r}")


def eval_model(f, model: FiniteModel) -> dict:
    if free_vars(f):
        raise ValueError(f"formula has free variables {sorted(free_vars(f))}")
    check_positive(f)
    must, may = eval_pair(f, model)
    out = {}
    for i, v in enumerate(model.nodes):
        if must >> i & 1:
            out[v] = TRUE
        elif may >> i & 1:
            out[v] = UNKNOWN
        else:
            out[v] = FALSE
    return out


def eval_bounded(f, t: PartialTree) -> dict:
    """``node -> true/false/unknown`` on a finite prefix; ⊥ nodes are undetermined."""
    return eval_model(f, FiniteModel.from_tree(t))


def naive_eval(f, t: PartialTree, env=None) -> set:
    """Set of nodes satisfying ``f`` on a ⊥-free tree, by direct set iteration."""
    env = env or {}
    nodes = set(t.nodes())
    kind = type(f)
    if kind is Const:
        return set(nodes) if f.value else set()
    if kind is Var:
        return set(env[f.name])
    if kind is Prop:
        return {u for u in nodes if t[u] == f.label}
    if kind is Not:
        return nodes - naive_eval(f.body, t, env)
    if kind is And:
        return naive_eval(f.left, t, env) & naive_eval(f.right, t, env)
    if kind is Or:
        return naive_eval(f.left, t, env) | naive_eval(f.right, t, env)
    if kind in (Dia, Box):
        inner = naive_eval(f.body, t, env)
        d = int(f.dir) if f.dir.isdigit() else None
        out = set()
        for u in nodes:
            child = u + (d,) if d is not None else None
            present = child in nodes
            if kind is Dia and present and child in inner:
                out.add(u)
            if kind is Box and (not present or child in inner):
                out.add(u)
        return out
    if kind in (Mu, Nu):
        cur = set() if kind is Mu else set(nodes)
        while True:
            nxt = naive_eval(f.body, t, {**env, f.var: cur})
            if nxt == cur:
                return cur
            cur = nxt
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- reflection


class Reflection(NamedTuple):
    tree: PartialTree
    values: dict
    unknown: list


def bar(a: str) -> str:
    return a + BAR


def unbar(a: str) -> str:
    return a[: -len(BAR)] if a.endswith(BAR) else a


def reflect_prefix(t: PartialTree, f) -> Reflection:
    values = eval_bounded(f, t)
    marked = t.relabel(lambda u, a: bar(a) if values[u] == TRUE else a)
    unknown = [u for u in t.nodes() if values[u] == UNKNOWN]
    return Reflection(marked, values, unknown)


def reflect_tree(source, f, budget: Budget | None = None, labeling=None, alphabet=None) -> Reflection:
    """Bar the nodes of the generated prefix where ``f`` surely holds.

    ``source`` is a :class:`Scheme`, or a :class:`Cpda` together with a
    state labelling and ranked alphabet. Undecided nodes are listed in
    ``unknown`` and left unbarred.
    """
    budget = budget or Budget()
    if isinstance(source, Scheme):
        t = unfold_value_tree(source, budget)
    elif isinstance(source, Cpda):
        if labeling is None or alphabet is None:
            raise ValueError("a CPDA source needs a labelling and an alphabet")
        t = generate_tree(source, labeling, alphabet, budget.max_depth)
    else:
        raise TypeError(f"cannot reflect over {type(source).__name__}")
    return reflect_prefix(t, f)


def marked_nodes(r: Reflection) -> list:
    return [u for u in r.tree.nodes() if r.values[u] == TRUE]


def format_values(values: Mapping) -> str:
    return "".join(f"{node_str(u)} {v}\n" for u, v in sorted(values.items(), key=lambda kv: (len(kv[0]), kv[0])))
