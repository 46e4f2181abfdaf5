"""Tick annotation of schemes, tick-chain contraction, and pair marking of trees."""

from __future__ import annotations

from .core import BOTTOM, TERMINAL, App, HocpdaError, PartialTree, Sym, Term, spine
from .hors import _DIVERGENT, _EXHAUSTED, Budget, Rule, Scheme, _HeadNormaliser, require_valid

TICK = "@"
BOX = "⊠"
BULLET = "•"


class SymbolClash(HocpdaError):
    pass


class InvalidMark(HocpdaError):
    pass


class NodeOutOfDomain(HocpdaError):
    pass


# ---------------------------------------------------------------- ticks


def tick_transform(s: Scheme, tick: str = TICK) -> Scheme:
    """Wrap every rule body in a fresh unary terminal ``tick``."""
    require_valid(s)
    if tick in s.terminals or tick in s.nonterminals:
        raise SymbolClash(f"{tick!r} is already used by the scheme")
    at = Sym(tick, TERMINAL)
    rules = [Rule(r.head, r.params, App(at, r.body)) for r in s.rules]
    terminals = s.terminals.extended({tick: 1})
    return Scheme(terminals, dict(s.nonterminals), s.start, rules)


def erase_ticks(t: Term, tick: str = TICK) -> Term:
    """Remove every ``tick`` application from a term of the ticked scheme."""
    memo = {}

    def go(term):
        key = id(term)
        if key in memo:
            return memo[key]
        head, args = spine(term)
        if head.name == tick and head.kind == TERMINAL and len(args) == 1:
            out = go(args[0])
        elif not args:
            out = term
        else:
            out = head
            for a in args:
                out = App(out, go(a))
        memo[key] = out
        return out

    return go(t)


def tick_unfold(s_tick: Scheme, base: Scheme, budget: Budget | None = None, tick: str = TICK):
    """Unfold a ticked scheme, cutting infinite tick branches.

    Depth counts only non-tick nodes, so the contracted tree is resolved to
    ``max_depth``. Each tick chain is checked against the base scheme: when
    head reduction of the tick-free term does not finish within
    ``max_steps`` (or cycles), the chain start is recorded as a divergence
    mark and its child is cut to ⊥. Returns ``(tree, marks)``.
    """
    budget = budget or Budget()
    require_valid(s_tick)
    require_valid(base)
    ticked = _HeadNormaliser(s_tick, budget.max_steps)
    plain = _HeadNormaliser(base, budget.max_steps)
    labels = {}
    marks = set()
    todo = [((), s_tick.start_term(), 0, False)]
    while todo:
        node, term, depth, in_chain = todo.pop()
        r = ticked.run(term)
        if r is _EXHAUSTED or r is _DIVERGENT:
            labels[node] = BOTTOM
            continue
        head, args = spine(r)
        if head.name == tick and len(args) == 1:
            if not in_chain:
                probe = plain.run(erase_ticks(term, tick))
                if probe is _EXHAUSTED or probe is _DIVERGENT:
                    labels[node] = tick
                    labels[node + (1,)] = BOTTOM
                    marks.add(node)
                    continue
            labels[node] = tick
            todo.append((node + (1,), args[0], depth, True))
            continue
        if depth >= budget.max_depth and args:
            labels[node] = BOTTOM
            continue
        labels[node] = head.name
        for i, a in enumerate(args, start=1):
            todo.append((node + (i,), a, depth + 1, False))
    return PartialTree(labels), marks


def frontier_tick_marks(t: PartialTree, tick: str = TICK) -> set:
    """Starts of tick chains that run unbroken into a truncation ⊥.

    A cheap stand-in for divergence detection on fixtures whose finite
    chains are known to be shorter than the truncation.
    """
    marks = set()
    for u, a in t.items():
        if a != tick or (u and t[u[:-1]] == tick):
            continue
        w = u
        while t.get(w) == tick:
            w = w + (1,)
        if t.get(w) == BOTTOM:
            marks.add(u)
    return marks


def contract_ticks(t: PartialTree, marks=(), tick: str = TICK, box: str = BOX) -> PartialTree:
    """Marked tick nodes become ``box`` leaves; other tick chains are squeezed out."""
    marks = set(marks)
    for u in marks:
        if t.get(u) != tick:
            raise InvalidMark(f"marked node {u} is labelled {t.get(u)!r}, not {tick!r}")
    labels = {}
    stack = [((), ())]
    while stack:
        src, dst = stack.pop()
        while src not in marks and t[src] == tick:
            child = src + (1,)
            if child not in t:
                raise InvalidMark(f"tick node {src} has no child")
            src = child
        if src in marks:
            labels[dst] = box
            continue
        labels[dst] = t[src]
        for c in t.children(src):
            stack.append((c, dst + (c[-1],)))
    return PartialTree(labels)


def eliminate_divergence(s: Scheme, budget: Budget | None = None, tick: str = TICK) -> PartialTree:
    """Value tree of ``s`` with divergent positions shown as ⊠, via ticks."""
    budget = budget or Budget()
    s_tick = tick_transform(s, tick)
    t_at, marks = tick_unfold(s_tick, s, budget, tick)
    return contract_ticks(t_at, marks, tick)


# ---------------------------------------------------------------- pair marking


def pair_label(a: str, marks) -> str:
    return a + "{" + "".join(str(i) for i in sorted(marks)) + "}"


def split_pair_label(label: str) -> tuple[str, frozenset]:
    if not label.endswith("}") or "{" not in label:
        raise ValueError(f"not a pair-marked label: {label!r}")
    base, _, rest = label.rpartition("{")
    return base, frozenset(int(c) for c in rest[:-1])


def pair_mark(t: PartialTree, u=BULLET, v=BULLET) -> PartialTree:
    """Relabel every node ``w`` as ``(t(w), X)`` with 1∈X iff w=u and 2∈X iff w=v."""
    for name, x in (("u", u), ("v", v)):
        if x is not None and x != BULLET and x not in t:
            raise NodeOutOfDomain(f"{name} = {x} is not a node of the tree")

    def fn(w, a):
        marks = set()
        if w == u:
            marks.add(1)
        if w == v:
            marks.add(2)
        return pair_label(a, marks)

    return t.relabel(fn)


def erase_pair_marks(t: PartialTree) -> PartialTree:
    return t.relabel(lambda w, a: split_pair_label(a)[0])


def pair_alphabet(alphabet) -> dict:
    """Ranked alphabet Σ×2^{1,2} as a plain name -> arity dict."""
    out = {}
    for a, k in alphabet.items():
        if a == BOTTOM:
            continue
        for marks in ((), (1,), (2,), (1, 2)):
            out[pair_label(a, marks)] = k
    return out
