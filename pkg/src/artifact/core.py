"""Simple types, ranked alphabets, applicative terms and finite partial trees."""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .sexpr import ParseError, dump, parse_one

BOTTOM = "⊥"

Node = tuple  # a word over directions 1..m; () is the root


class HocpdaError(Exception):
    """Base class for input errors raised by this package."""


class UnboundSymbol(HocpdaError):
    pass


class ArgumentTypeMismatch(HocpdaError):
    pass


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Ground:
    def __str__(self) -> str:
        return "o"


@dataclass(frozen=True)
class Arrow:
    left: "SimpleType"
    right: "SimpleType"

    def __str__(self) -> str:
        left = str(self.left)
        if isinstance(self.left, Arrow):
            left = f"({left})"
        return f"{left} -> {self.right}"


SimpleType = Ground | Arrow
O = Ground()


def arrow(*types: SimpleType) -> SimpleType:
    """Right-associated arrow: ``arrow(a, b, o)`` is ``a -> (b -> o)``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def type_args(t: SimpleType) -> list[SimpleType]:
    args = []
    while isinstance(t, Arrow):
        args.append(t.left)
        t = t.right
    return args


def type_arity(t: SimpleType) -> int:
    return len(type_args(t))


def type_order(t: SimpleType) -> int:
    if isinstance(t, Ground):
        return 0
    return max(type_order(t.left) + 1, type_order(t.right))


def ground_arrow(arity: int) -> SimpleType:
    """Type of a terminal of the given arity: o -> ... -> o."""
    return arrow(*([O] * (arity + 1)))


def type_from_sexpr(form) -> SimpleType:
    if form == "o":
        return O
    if isinstance(form, list) and len(form) >= 3 and form[0] == "->":
        return arrow(*(type_from_sexpr(f) for f in form[1:]))
    raise ParseError(f"bad type: {dump(form)}")


def type_to_sexpr(t: SimpleType):
    if isinstance(t, Ground):
        return "o"
    return ["->"] + [type_to_sexpr(a) for a in type_args(t)] + ["o"]


# ---------------------------------------------------------------- alphabets


class RankedAlphabet(Mapping[str, int]):
    """Symbol name -> arity. The nullary bottom symbol is always present."""

    def __init__(self, arities: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = dict(arities)
        if BOTTOM in items and items[BOTTOM] != 0:
            raise ValueError("⊥ is reserved and nullary")
        for name, k in items.items():
            if not isinstance(k, int) or k < 0:
                raise ValueError(f"bad arity for {name!r}: {k!r}")
        items[BOTTOM] = 0
        self._arity = MappingProxyType(items)

    def __getitem__(self, name: str) -> int:
        return self._arity[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._arity)

    def __len__(self) -> int:
        return len(self._arity)

    def __eq__(self, other) -> bool:
        if isinstance(other, RankedAlphabet):
            return dict(self._arity) == dict(other._arity)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._arity.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}:{v}" for k, v in sorted(self.user_items()))
        return f"RankedAlphabet({inner})"

    def user_items(self) -> list[tuple[str, int]]:
        return [(k, v) for k, v in self._arity.items() if k != BOTTOM]

    @property
    def max_arity(self) -> int:
        return max(self._arity.values())

    def extended(self, extra: Mapping[str, int]) -> "RankedAlphabet":
        merged = dict(self.user_items())
        merged.update(extra)
        return RankedAlphabet(merged)


# ---------------------------------------------------------------- terms

TERMINAL = "terminal"
NONTERMINAL = "nonterminal"
VARIABLE = "variable"


class Term:
    """Hash-consed applicative term; equal terms are the same object."""

    __slots__ = ("__weakref__",)
    _table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()

    def __reduce__(self):
        raise TypeError("terms are interned and not picklable")


class Sym(Term):
    __slots__ = ("name", "kind", "_hash")

    def __new__(cls, name: str, kind: str = TERMINAL):
        key = ("s", name, kind)
        cached = Term._table.get(key)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "_hash", hash(key))
        Term._table[key] = self
        return self

    def __setattr__(self, *_):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return self.name


class App(Term):
    __slots__ = ("fun", "arg", "_hash")

    def __new__(cls, fun: Term, arg: Term):
        key = ("a", id(fun), id(arg))
        cached = Term._table.get(key)
        if cached is not None and cached.fun is fun and cached.arg is arg:
            return cached
        self = object.__new__(cls)
        object.__setattr__(self, "fun", fun)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_hash", hash(key))
        Term._table[key] = self
        return self

    def __setattr__(self, *_):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return term_to_text(self)


def app(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Sym, list[Term]]:
    """Split ``h t1 ... tn`` into its head symbol and argument list."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def symbols(t: Term) -> set[Sym]:
    seen: set[int] = set()
    out: set[Sym] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if id(s) in seen:
            continue
        seen.add(id(s))
        if isinstance(s, Sym):
            out.add(s)
        else:
            stack.append(s.fun)
            stack.append(s.arg)
    return out


def term_to_sexpr(t: Term):
    head, args = spine(t)
    if not args:
        return head.name
    return [head.name] + [term_to_sexpr(a) for a in args]


def term_to_text(t: Term) -> str:
    return dump(term_to_sexpr(t))


def term_from_sexpr(form, kind_of: Mapping[str, str]) -> Term:
    """Build a term; ``kind_of`` maps every symbol name to its kind."""
    if isinstance(form, list):
        if not form:
            raise ParseError("empty application")
        parts = [term_from_sexpr(f, kind_of) for f in form]
        return app(parts[0], *parts[1:])
    if form not in kind_of:
        raise UnboundSymbol(f"unknown symbol {form!r}")
    return Sym(form, kind_of[form])


def infer_type(t: Term, env: Mapping[str, SimpleType]) -> SimpleType:
    """Type of ``t`` under ``env`` by the application rule."""
    memo: dict[int, SimpleType] = {}

    def go(s: Term) -> SimpleType:
        key = id(s)
        if key in memo:
            return memo[key]
        if isinstance(s, Sym):
            if s.name not in env:
                raise UnboundSymbol(f"unbound symbol {s.name!r}")
            result = env[s.name]
        else:
            ft = go(s.fun)
            at = go(s.arg)
            if not isinstance(ft, Arrow):
                raise ArgumentTypeMismatch(
                    f"in {term_to_text(s)}: {term_to_text(s.fun)} has type {ft}, not a function type"
                )
            if ft.left != at:
                raise ArgumentTypeMismatch(
                    f"in {term_to_text(s)}: expected argument of type {ft.left}, "
                    f"got {term_to_text(s.arg)} : {at}"
                )
            result = ft.right
        memo[key] = result
        return result

    return go(t)


# ---------------------------------------------------------------- trees


def node_str(u: Node) -> str:
    if not u:
        return "ε"
    if all(d < 10 for d in u):
        return "".join(str(d) for d in u)
    return ".".join(str(d) for d in u)


def parse_node(text: str) -> Node:
    text = text.strip()
    if text in ("", "ε", "e", "eps"):
        return ()
    if "." in text:
        return tuple(int(p) for p in text.split("."))
    return tuple(int(c) for c in text)


class PartialTree:
    """Finite ranked tree prefix; ``labels`` maps direction words to symbols.

    Nodes are tuples of 1-based directions. ⊥-labelled nodes are leaves.
    """

    __slots__ = ("_labels", "_hash")

    def __init__(self, labels: Mapping[Node, str]):
        labels = dict(labels)
        if () not in labels:
            raise ValueError("tree has no root")
        for u, a in labels.items():
            if u and u[:-1] not in labels:
                raise ValueError(f"domain not prefix-closed at {node_str(u)}")
            if u and u[-1] < 1:
                raise ValueError(f"directions are 1-based: {u}")
            if a == BOTTOM and u + (1,) in labels:
                raise ValueError(f"⊥ node {node_str(u)} has children")
        self._labels = MappingProxyType(labels)
        self._hash = None

    # construction helpers
    @classmethod
    def leaf(cls, label: str = BOTTOM) -> "PartialTree":
        return cls({(): label})

    @classmethod
    def build(cls, label: str, *children: "PartialTree") -> "PartialTree":
        labels = {(): label}
        for i, c in enumerate(children, start=1):
            for u, a in c.items():
                labels[(i,) + u] = a
        return cls(labels)

    @classmethod
    def from_nested(cls, nested) -> "PartialTree":
        """``("f", ("a",), "b")``-style nesting; bare strings are leaves."""
        labels: dict[Node, str] = {}

        def go(n, u):
            if isinstance(n, str):
                labels[u] = n
                return
            labels[u] = n[0]
            for i, c in enumerate(n[1:], start=1):
                go(c, u + (i,))

        go(nested, ())
        return cls(labels)

    # mapping-like access
    def __getitem__(self, u: Node) -> str:
        return self._labels[u]

    def __contains__(self, u) -> bool:
        return u in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def get(self, u: Node, default=None):
        return self._labels.get(u, default)

    def items(self):
        return self._labels.items()

    @property
    def labels(self) -> Mapping[Node, str]:
        return self._labels

    def nodes(self) -> list[Node]:
        return sorted(self._labels)

    def children(self, u: Node) -> list[Node]:
        out = []
        i = 1
        while u + (i,) in self._labels:
            out.append(u + (i,))
            i += 1
        return out

    def is_leaf(self, u: Node) -> bool:
        return u + (1,) not in self._labels

    def depth(self) -> int:
        return max(len(u) for u in self._labels)

    def has_bottom(self) -> bool:
        return any(a == BOTTOM for a in self._labels.values())

    def subtree(self, u: Node) -> "PartialTree":
        k = len(u)
        return PartialTree({w[k:]: a for w, a in self._labels.items() if w[:k] == u})

    def relabel(self, fn) -> "PartialTree":
        return PartialTree({u: fn(u, a) for u, a in self._labels.items()})

    def truncate(self, depth: int) -> "PartialTree":
        """Keep nodes up to ``depth``; deeper material is cut to ⊥ at that depth."""
        labels = {}
        for u, a in self._labels.items():
            if len(u) < depth:
                labels[u] = a
            elif len(u) == depth:
                labels[u] = a if self.is_leaf(u) else BOTTOM
        return PartialTree(labels)

    def check_ranked(self, arities: Mapping[str, int]) -> list[str]:
        """Return violations of 'children = {1..arity(label)}' (empty when ranked)."""
        problems = []
        for u, a in sorted(self._labels.items()):
            if a not in arities:
                problems.append(f"{node_str(u)}: unknown symbol {a!r}")
                continue
            got = len(self.children(u))
            if a != BOTTOM and got != arities[a]:
                problems.append(f"{node_str(u)}: {a} has arity {arities[a]} but {got} children")
            if u + (got + 1,) in self._labels:
                problems.append(f"{node_str(u)}: children not contiguous")
        return problems

    # equality and text
    def __eq__(self, other) -> bool:
        if isinstance(other, PartialTree):
            return dict(self._labels) == dict(other._labels)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._labels.items()))
        return self._hash

    def to_text(self) -> str:
        parts: list[str] = []

        def go(u):
            parts.append("(")
            parts.append(self._labels[u])
            for c in self.children(u):
                parts.append(" ")
                go(c)
            parts.append(")")

        go(())
        return "".join(parts)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"PartialTree({self.to_text()})"

    @classmethod
    def parse(cls, text: str) -> "PartialTree":
        form = parse_one(text)
        labels: dict[Node, str] = {}

        def go(f, u):
            if not isinstance(f, list) or not f or isinstance(f[0], list):
                raise ParseError(f"bad tree form at {node_str(u)}: {dump(f)}")
            labels[u] = f[0]
            for i, c in enumerate(f[1:], start=1):
                go(c, u + (i,))

        go(form, ())
        return cls(labels)


def tree_leq(t1: PartialTree, t2: PartialTree) -> bool:
    """Approximation order: t1 is t2 with some subtrees replaced by ⊥."""
    for u, a in t1.items():
        b = t2.get(u)
        if b is None:
            return False
        if a != BOTTOM and a != b:
            return False
    return True


def trees_compatible(t1: PartialTree, t2: PartialTree) -> bool:
    """True when t1 and t2 have a common upper bound for the approximation order."""
    for u, a in t1.items():
        b = t2.get(u)
        if b is not None and a != BOTTOM and b != BOTTOM and a != b:
            return False
    return True


def first_difference(t1: PartialTree, t2: PartialTree, depth: int | None = None):
    """First node (in canonical order) where two trees disagree, or None."""
    nodes = sorted(set(t1.labels) | set(t2.labels))
    for u in nodes:
        if depth is not None and len(u) > depth:
            continue
        a, b = t1.get(u), t2.get(u)
        if a != b:
            return u, a, b
    return None
