"""Higher-order recursion schemes: parsing, validation, OI rewriting, value-tree unfolding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .core import (
    BOTTOM,
    NONTERMINAL,
    TERMINAL,
    VARIABLE,
    App,
    ArgumentTypeMismatch,
    O,
    PartialTree,
    RankedAlphabet,
    Sym,
    Term,
    UnboundSymbol,
    app,
    ground_arrow,
    infer_type,
    spine,
    term_from_sexpr,
    term_to_sexpr,
    type_args,
    type_from_sexpr,
    type_order,
    type_to_sexpr,
)
from .sexpr import ParseError, dump, parse_all


class InvalidScheme(ValueError):
    """Raised when an operation needs a valid scheme and gets a broken one."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Rule:
    head: str
    params: tuple
    body: Term


@dataclass
class Scheme:
    terminals: RankedAlphabet
    nonterminals: dict
    start: str
    rules: list = field(default_factory=list)

    def __post_init__(self):
        self._by_head = {}
        for r in self.rules:
            self._by_head.setdefault(r.head, r)

    def rule(self, name: str) -> Rule:
        return self._by_head[name]

    @property
    def order(self) -> int:
        return max((type_order(t) for t in self.nonterminals.values()), default=0)

    def env(self) -> dict:
        env = {name: ground_arrow(k) for name, k in self.terminals.items()}
        env.update(self.nonterminals)
        return env

    def start_term(self) -> Term:
        return Sym(self.start, NONTERMINAL)

    def __eq__(self, other):
        if not isinstance(other, Scheme):
            return NotImplemented
        return (
            self.terminals == other.terminals
            and self.nonterminals == other.nonterminals
            and self.start == other.start
            and self.rules == other.rules
        )

    # text format
    def to_text(self) -> str:
        lines = []
        terms = " ".join(f"({a} {k})" for a, k in self.terminals.user_items())
        lines.append(f"(terminals {terms})")
        nts = " ".join(f"({n} {dump(type_to_sexpr(t))})" for n, t in self.nonterminals.items())
        lines.append(f"(nonterminals {nts})")
        lines.append(f"(start {self.start})")
        rules = [f"  ({dump([r.head, *r.params])} {dump(term_to_sexpr(r.body))})" for r in self.rules]
        lines.append("(rules\n" + "\n".join(rules) + ")" if rules else "(rules)")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        return parse_scheme(text)


def parse_scheme(text: str) -> Scheme:
    """Read the parenthesised scheme format.

    Symbols in a rule body that are neither terminals, nonterminals nor
    parameters are kept as variables so that ``validate`` can report them.
    """
    blocks = {}
    for form in parse_all(text):
        if not isinstance(form, list) or not form or isinstance(form[0], list):
            raise ParseError(f"bad top-level form: {dump(form)}")
        key = form[0]
        if key in blocks:
            raise ParseError(f"duplicate block {key!r}")
        blocks[key] = form[1:]
    for key in ("terminals", "nonterminals", "start", "rules"):
        if key not in blocks:
            raise ParseError(f"missing block {key!r}")
    terminals = {}
    for entry in blocks["terminals"]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"bad terminal entry: {dump(entry)}")
        try:
            terminals[entry[0]] = int(entry[1])
        except ValueError:
            raise ParseError(f"bad arity in {dump(entry)}") from None
    nonterminals = {}
    for entry in blocks["nonterminals"]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"bad nonterminal entry: {dump(entry)}")
        nonterminals[entry[0]] = type_from_sexpr(entry[1])
    if len(blocks["start"]) != 1 or isinstance(blocks["start"][0], list):
        raise ParseError("start block takes one name")
    start = blocks["start"][0]
    rules = []
    for entry in blocks["rules"]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"bad rule: {dump(entry)}")
        lhs, body = entry
        if isinstance(lhs, str):
            lhs = [lhs]
        if not lhs or any(isinstance(x, list) for x in lhs):
            raise ParseError(f"bad rule head: {dump(lhs)}")
        head, params = lhs[0], tuple(lhs[1:])
        rules.append(Rule(head, params, _body_term(body, terminals, nonterminals, params)))
    return Scheme(RankedAlphabet(terminals), nonterminals, start, rules)


def _body_term(form, terminals, nonterminals, params) -> Term:
    kinds = _Kinds(terminals, nonterminals, params)
    return term_from_sexpr(form, kinds)


class _Kinds(dict):
    """Name -> kind lookup where unknown names default to variables."""

    def __init__(self, terminals, nonterminals, params):
        super().__init__()
        for a in terminals:
            self[a] = TERMINAL
        self[BOTTOM] = TERMINAL
        for n in nonterminals:
            self[n] = NONTERMINAL
        for p in params:
            self[p] = VARIABLE

    def __contains__(self, key):
        return True

    def __missing__(self, key):
        return VARIABLE


# ---------------------------------------------------------------- validation


def validate(s: Scheme) -> list[str]:
    """Return diagnostics; an empty list means the scheme is well formed."""
    diags = []
    for name in s.nonterminals:
        if name in s.terminals:
            diags.append(f"{name}: declared both as terminal and nonterminal")
    if s.start not in s.nonterminals:
        diags.append(f"start symbol {s.start}: not a declared nonterminal")
    elif s.nonterminals[s.start] != O:
        diags.append(f"start symbol {s.start}: not of ground type")
    seen = set()
    for r in s.rules:
        where = f"rule {r.head}"
        if r.head in seen:
            diags.append(f"{where}: duplicate rule")
            continue
        seen.add(r.head)
        if r.head not in s.nonterminals:
            diags.append(f"{where}: head is not a declared nonterminal")
            continue
        arg_types = type_args(s.nonterminals[r.head])
        if len(r.params) != len(arg_types):
            diags.append(
                f"{where}: {len(r.params)} parameters but type {s.nonterminals[r.head]} "
                f"takes {len(arg_types)}"
            )
            continue
        if len(set(r.params)) != len(r.params):
            diags.append(f"{where}: repeated parameter name")
            continue
        for p in r.params:
            if p in s.terminals or p in s.nonterminals:
                diags.append(f"{where}: parameter {p} shadows a symbol")
        env = s.env()
        env.update(zip(r.params, arg_types))
        for sym in _symbols(r.body):
            if sym.kind == VARIABLE and sym.name not in r.params:
                diags.append(f"{where}: unbound variable {sym.name}")
        try:
            ty = infer_type(r.body, env)
        except (UnboundSymbol, ArgumentTypeMismatch) as exc:
            diags.append(f"{where}: {exc}")
            continue
        if ty != O:
            diags.append(f"{where}: body has type {ty}, expected o")
    for name in s.nonterminals:
        if name not in seen:
            diags.append(f"nonterminal {name}: missing rule")
    return diags


def _symbols(t: Term):
    from .core import symbols

    return sorted(symbols(t), key=lambda x: (x.kind, x.name))


def require_valid(s: Scheme) -> None:
    diags = validate(s)
    if diags:
        raise InvalidScheme(diags)


# ---------------------------------------------------------------- projection


def bottom_project(t: Term) -> PartialTree:
    """Replace every nonterminal-headed subterm by ⊥."""
    labels = {}

    def go(term, node):
        head, args = spine(term)
        if head.kind != TERMINAL:
            labels[node] = BOTTOM
            return
        labels[node] = head.name
        for i, a in enumerate(args, start=1):
            go(a, node + (i,))

    go(t, ())
    return PartialTree(labels)


# ---------------------------------------------------------------- rewriting


def substitute(body: Term, binding: Mapping[str, Term]) -> Term:
    memo = {}

    def go(t):
        key = id(t)
        if key in memo:
            return memo[key]
        if isinstance(t, Sym):
            out = binding[t.name] if t.kind == VARIABLE else t
        else:
            f, a = go(t.fun), go(t.arg)
            out = t if (f is t.fun and a is t.arg) else App(f, a)
        memo[key] = out
        return out

    return go(body)


def contract(s: Scheme, t: Term) -> Term:
    """Contract ``t`` itself, which must be a ground redex ``F t1 .. tn``."""
    head, args = spine(t)
    if head.kind != NONTERMINAL:
        raise ValueError(f"not a redex: {t!r}")
    r = s.rule(head.name)
    if len(args) != len(r.params):
        raise ValueError(f"redex {t!r} is not of ground type")
    return substitute(r.body, dict(zip(r.params, args)))


def _arity_of(s: Scheme, head: Sym) -> int:
    if head.kind == TERMINAL:
        return s.terminals[head.name]
    return len(type_args(s.nonterminals[head.name]))


def redexes(s: Scheme, t: Term) -> list[tuple]:
    """Positions of ground-type nonterminal-headed subterms, in preorder.

    A position is the sequence of argument indices (1-based) followed through
    successive application spines.
    """
    out = []

    def go(term, pos):
        head, args = spine(term)
        if head.kind == NONTERMINAL and len(args) == _arity_of(s, head):
            out.append(pos)
        for i, a in enumerate(args, start=1):
            go(a, pos + (i,))

    go(t, ())
    return out


def outermost(positions: list[tuple]) -> list[tuple]:
    keep = []
    for p in positions:
        if not any(p[: len(q)] == q for q in keep):
            keep.append(p)
    return keep


def subterm_at(t: Term, pos: tuple) -> Term:
    for i in pos:
        _, args = spine(t)
        t = args[i - 1]
    return t


def replace_at(t: Term, pos: tuple, new: Term) -> Term:
    if not pos:
        return new
    head, args = spine(t)
    i = pos[0] - 1
    args = list(args)
    args[i] = replace_at(args[i], pos[1:], new)
    return app(head, *args)


def contract_at(s: Scheme, t: Term, pos: tuple) -> Term:
    return replace_at(t, pos, contract(s, subterm_at(t, pos)))


def step(s: Scheme, t: Term, strategy: str = "leftmost") -> Term | None:
    """One OI step; ``None`` when no redex is left.

    ``leftmost`` contracts the leftmost-outermost redex, ``rightmost`` the
    rightmost of the outermost redexes.
    """
    found = outermost(redexes(s, t))
    if not found:
        return None
    if strategy == "leftmost":
        pos = found[0]
    elif strategy == "rightmost":
        pos = found[-1]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return contract_at(s, t, pos)


def reduction_sequence(s: Scheme, n: int, strategy: str = "leftmost", start: Term | None = None):
    """The start term followed by up to ``n`` reducts."""
    t = s.start_term() if start is None else start
    seq = [t]
    for _ in range(n):
        t = step(s, t, strategy)
        if t is None:
            break
        seq.append(t)
    return seq


# ---------------------------------------------------------------- unfolding


@dataclass(frozen=True)
class Budget:
    max_depth: int = 10
    max_steps: int = 100_000


_EXHAUSTED = object()
_DIVERGENT = object()


class _HeadNormaliser:
    """Head reduction with a per-call step budget and a shared cache."""

    def __init__(self, s: Scheme, max_steps: int):
        self.s = s
        self.max_steps = max_steps
        self.cache = {}

    def run(self, t: Term):
        cached = self.cache.get(t)
        if cached is not None:
            return cached
        trail = []
        seen = set()
        cur = t
        result = None
        for _ in range(self.max_steps + 1):
            hit = self.cache.get(cur)
            if hit is not None and hit is not _EXHAUSTED:
                result = hit
                break
            head, _ = spine(cur)
            if head.kind == TERMINAL:
                result = cur
                break
            if cur in seen:
                result = _DIVERGENT
                break
            seen.add(cur)
            trail.append(cur)
            cur = contract(self.s, cur)
        else:
            self.cache[t] = _EXHAUSTED
            return _EXHAUSTED
        for u in trail:
            self.cache[u] = result
        self.cache[t] = result
        return result


def unfold_value_tree(s: Scheme, budget: Budget | None = None, *, max_depth=None, max_steps=None) -> PartialTree:
    """Finite approximation of the value tree.

    Nodes at depth below ``max_depth`` carry their value-tree label, or ⊥ when
    head reduction at that node diverges or needs more than ``max_steps``
    steps. Nodes at depth ``max_depth`` keep nullary labels and are cut to ⊥
    otherwise.
    """
    budget = budget or Budget()
    depth = budget.max_depth if max_depth is None else max_depth
    steps = budget.max_steps if max_steps is None else max_steps
    require_valid(s)
    hn = _HeadNormaliser(s, steps)
    labels = {}
    todo = [((), s.start_term())]
    while todo:
        node, term = todo.pop()
        r = hn.run(term)
        if r is _EXHAUSTED or r is _DIVERGENT:
            labels[node] = BOTTOM
            continue
        head, args = spine(r)
        if len(node) >= depth and args:
            labels[node] = BOTTOM
            continue
        labels[node] = head.name
        for i, a in enumerate(args, start=1):
            todo.append((node + (i,), a))
    return PartialTree(labels)
