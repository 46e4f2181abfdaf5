"""Stacks with links, collapsible pushdown automata and their configuration graphs.

Links are numeric. A symbol carries ``(e, p)``: collapsing on it cuts the top
``e``-stack down to its first ``p`` elements. Copies made by ``push_j`` keep
the pair unchanged, so they keep pointing at the same prefix.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .core import BOTTOM, HocpdaError, PartialTree, RankedAlphabet
from .sexpr import ParseError, dump, parse_all

EPS = "eps"
SHARP = "♯"


class StackSymbol(NamedTuple):
    name: str
    e: int = 0
    p: int = 0


BOT = StackSymbol(BOTTOM, 0, 0)


class StackUndefined(HocpdaError):
    """A stack operation is not defined on the given stack."""


class InvalidCpda(HocpdaError):
    pass


class ArityMismatch(HocpdaError):
    pass


class DivergentEpsilon(HocpdaError):
    pass


class EpsilonBudgetExhausted(HocpdaError):
    pass


# ---------------------------------------------------------------- stacks


def _empty(order: int):
    s = (BOT,)
    for _ in range(order - 1):
        s = (s,)
    return s


class LinkedStack:
    """Immutable order-n stack; ``content`` is a nested tuple of StackSymbols."""

    __slots__ = ("order", "content", "_hash")

    def __init__(self, order: int, content=None):
        if order < 1:
            raise ValueError("stack order must be at least 1")
        self.order = order
        self.content = _empty(order) if content is None else content
        self._hash = None

    @classmethod
    def empty(cls, order: int) -> "LinkedStack":
        return cls(order)

    def __eq__(self, other):
        if not isinstance(other, LinkedStack):
            return NotImplemented
        return self.order == other.order and self.content == other.content

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.order, self.content))
        return self._hash

    def __repr__(self):
        return f"LinkedStack({format_stack(self)})"

    def __str__(self):
        return format_stack(self)

    def top_k(self, k: int):
        """``top_k``: the top (k-1)-stack; ``top_{n+1}`` is the whole content."""
        c = self.content
        for _ in range(self.order + 1 - k):
            c = c[-1]
        return c

    def top_symbol(self) -> StackSymbol:
        return self.top_k(1)

    def height(self) -> int:
        return len(self.content)

    def symbols(self):
        """Yield ``(path, symbol)`` for every symbol; path indexes are 0-based."""

        def go(c, level, path):
            if level == 1:
                for i, sym in enumerate(c):
                    yield path + (i,), sym
            else:
                for i, sub in enumerate(c):
                    yield from go(sub, level - 1, path + (i,))

        yield from go(self.content, self.order, ())

    def shape(self) -> "LinkedStack":
        return stack_shape(self)

    def check_links(self) -> list[str]:
        """Report violations of the well-formedness conditions on symbols and links."""
        problems = []
        n = self.order

        def walk(c, level):
            if not c:
                problems.append("empty stack component")
                return
            if level > 1:
                for sub in c:
                    walk(sub, level - 1)

        walk(self.content, n)
        for path, sym in self.symbols():
            pos = path[-1]
            if (sym.name == BOTTOM) != (pos == 0):
                problems.append(f"⊥ misplaced at {path}")
                continue
            if pos == 0:
                continue
            if not 1 <= sym.e <= n:
                problems.append(f"link order {sym.e} out of range at {path}")
                continue
            # index of the (e-1)-stack holding the symbol inside its e-stack
            idx = path[n - sym.e] + 1 if sym.e > 1 else pos + 1
            if not 1 <= sym.p < idx:
                problems.append(f"link {sym.e, sym.p} at {path} does not point strictly below")
        return problems


def _map_top(c, depth: int, fn):
    """Apply ``fn`` to the component ``depth`` levels down the top spine."""
    if depth == 0:
        return fn(c)
    return c[:-1] + (_map_top(c[-1], depth - 1, fn),)


def pop(s: LinkedStack, k: int) -> LinkedStack:
    n = s.order
    if not 1 <= k <= n:
        raise StackUndefined(f"pop_{k} on an order-{n} stack")

    def fn(c):
        if len(c) == 1:
            raise StackUndefined(f"pop_{k} on a one-element {k}-stack")
        return c[:-1]

    return LinkedStack(n, _map_top(s.content, n - k, fn))


def push(s: LinkedStack, j: int) -> LinkedStack:
    n = s.order
    if not 2 <= j <= n:
        raise StackUndefined(f"push_{j} on an order-{n} stack")
    return LinkedStack(n, _map_top(s.content, n - j, lambda c: c + (c[-1],)))


def push1(s: LinkedStack, gamma: str, e: int) -> LinkedStack:
    n = s.order
    if gamma == BOTTOM:
        raise StackUndefined("cannot push ⊥")
    if not 1 <= e <= n:
        raise StackUndefined(f"push1 with link order {e} on an order-{n} stack")
    if e == 1:
        p = len(s.top_k(2))
    else:
        height = len(s.top_k(e + 1))
        if height < 2:
            raise StackUndefined(f"push1 with a {e}-link needs an {e - 1}-stack below the top one")
        p = height - 1
    sym = StackSymbol(gamma, e, p)
    return LinkedStack(n, _map_top(s.content, n - 1, lambda c: c + (sym,)))


def rewrite_top(s: LinkedStack, gamma: str) -> LinkedStack:
    n = s.order
    if gamma == BOTTOM:
        raise StackUndefined("cannot rewrite to ⊥")

    def fn(c):
        if len(c) == 1:
            raise StackUndefined("rewrite on an empty 1-stack")
        old = c[-1]
        return c[:-1] + (StackSymbol(gamma, old.e, old.p),)

    return LinkedStack(n, _map_top(s.content, n - 1, fn))


def collapse(s: LinkedStack) -> LinkedStack:
    n = s.order
    top = s.top_symbol()
    if len(s.top_k(2)) == 1:
        raise StackUndefined("collapse on ⊥")
    e, p = top.e, top.p
    if not (1 <= e <= n and p >= 1):
        raise StackUndefined(f"collapse on malformed link {e, p}")

    def fn(c):
        if p >= len(c):
            raise StackUndefined("collapse target is not strictly below")
        return c[:p]

    return LinkedStack(n, _map_top(s.content, n - e, fn))


# ---------------------------------------------------------------- operations


class StackOp(NamedTuple):
    kind: str  # pop | push | push1 | rew | collapse | id
    k: int = 0
    sym: str | None = None

    def __str__(self):
        return dump(op_to_sexpr(self))

    @property
    def op_type(self):
        """Operation type used for synchronisation; payload symbols are ignored."""
        return (self.kind, self.k)


def Pop(k):
    return StackOp("pop", k)


def Push(j):
    return StackOp("push", j)


def Push1(sym, e=1):
    return StackOp("push1", e, sym)


def Rew(sym):
    return StackOp("rew", 0, sym)


COLLAPSE = StackOp("collapse")
ID = StackOp("id")


def apply_op_strict(s: LinkedStack, op: StackOp) -> LinkedStack:
    """Apply ``op``; raise StackUndefined with a reason when it is not defined."""
    kind = op.kind
    if kind == "pop":
        return pop(s, op.k)
    if kind == "push":
        return push(s, op.k)
    if kind == "push1":
        return push1(s, op.sym, op.k)
    if kind == "rew":
        return rewrite_top(s, op.sym)
    if kind == "collapse":
        return collapse(s)
    if kind == "id":
        return s
    raise ValueError(f"unknown stack operation {op!r}")


def apply_op(s: LinkedStack, op: StackOp) -> LinkedStack | None:
    """Apply ``op``; ``None`` when it is undefined."""
    try:
        return apply_op_strict(s, op)
    except StackUndefined:
        return None


def shape_op(op: StackOp) -> StackOp:
    if op.sym is None:
        return op
    return op._replace(sym=SHARP)


def stack_shape(s: LinkedStack) -> LinkedStack:
    def go(c, level):
        if level == 1:
            return tuple(StackSymbol(SHARP, x.e, x.p) for x in c)
        return tuple(go(sub, level - 1) for sub in c)

    return LinkedStack(s.order, go(s.content, s.order))


def op_to_sexpr(op: StackOp):
    if op.kind in ("pop", "push"):
        return [op.kind, str(op.k)]
    if op.kind == "push1":
        return ["push1", op.sym, str(op.k)]
    if op.kind == "rew":
        return ["rew", op.sym]
    return op.kind


def op_from_sexpr(form) -> StackOp:
    if form in ("collapse", "id"):
        return StackOp(form)
    if isinstance(form, list) and form:
        head = form[0]
        try:
            if head in ("pop", "push") and len(form) == 2:
                return StackOp(head, int(form[1]))
            if head == "push1" and len(form) in (2, 3):
                return Push1(form[1], int(form[2]) if len(form) == 3 else 1)
            if head == "rew" and len(form) == 2:
                return Rew(form[1])
        except ValueError:
            pass
    raise ParseError(f"bad stack operation: {dump(form)}")


# ---------------------------------------------------------------- stack literals

_STACK_TOKEN = re.compile(r"\[|\]|[^\s\[\]@]+@\(\s*\d+\s*,\s*\d+\s*\)|[^\s\[\]]+")
_LINK = re.compile(r"^(.*)@\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def parse_stack(text: str) -> LinkedStack:
    """Read ``[[⊥ α] [⊥ α β@(2,1)]]``; a symbol without ``@`` has a 1-link to the one below."""
    tokens = _STACK_TOKEN.findall(text)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "[":
            raise ParseError(f"expected '[' in stack literal {text!r}")
        pos += 1
        items = []
        while pos < len(tokens) and tokens[pos] != "]":
            if tokens[pos] == "[":
                items.append(read())
            else:
                items.append(tokens[pos])
                pos += 1
        if pos >= len(tokens):
            raise ParseError(f"unbalanced stack literal {text!r}")
        pos += 1
        return items

    tree = read()
    if pos != len(tokens):
        raise ParseError(f"trailing input in stack literal {text!r}")

    def level(x):
        if isinstance(x, str):
            return 0
        if not x:
            raise ParseError("empty stack component")
        levels = {level(y) for y in x}
        if len(levels) != 1:
            raise ParseError("mixed nesting in stack literal")
        return levels.pop() + 1

    order = level(tree)

    def build(x, lvl):
        if lvl == 1:
            out = []
            for i, tok in enumerate(x):
                m = _LINK.match(tok)
                if m:
                    out.append(StackSymbol(m.group(1), int(m.group(2)), int(m.group(3))))
                elif tok == BOTTOM:
                    out.append(BOT)
                else:
                    out.append(StackSymbol(tok, 1, i))
            return tuple(out)
        return tuple(build(y, lvl - 1) for y in x)

    s = LinkedStack(order, build(tree, order))
    problems = s.check_links()
    if problems:
        raise ParseError("; ".join(problems))
    return s


def format_stack(s: LinkedStack) -> str:
    def go(c, level):
        if level == 1:
            parts = []
            for i, sym in enumerate(c):
                if i == 0 or (sym.e == 1 and sym.p == i):
                    parts.append(sym.name)
                else:
                    parts.append(f"{sym.name}@({sym.e},{sym.p})")
            return "[" + " ".join(parts) + "]"
        return "[" + " ".join(go(sub, level - 1) for sub in c) + "]"

    return go(s.content, s.order)


# ---------------------------------------------------------------- automata


class Config(NamedTuple):
    state: str
    stack: LinkedStack

    def __str__(self):
        return f"({self.state}, {format_stack(self.stack)})"


@dataclass
class Cpda:
    order: int
    letters: list  # non-silent input letters, in declaration order
    stack_alphabet: list
    states: list
    initial: str
    final: frozenset = frozenset()
    delta: dict = field(default_factory=dict)  # (q, γ, a) -> (q', StackOp)

    def __post_init__(self):
        self.final = frozenset(self.final)
        problems = self.check()
        if problems:
            raise InvalidCpda("; ".join(problems))
        self._letters_at = {}
        for (q, g, a) in self.delta:
            self._letters_at.setdefault((q, g), set()).add(a)

    def check(self) -> list[str]:
        problems = []
        states = set(self.states)
        gammas = set(self.stack_alphabet) | {BOTTOM}
        letters = set(self.letters) | {EPS}
        if self.initial not in states:
            problems.append(f"initial state {self.initial} undeclared")
        for q in self.final:
            if q not in states:
                problems.append(f"final state {q} undeclared")
        by_key = {}
        for (q, g, a), (q2, op) in self.delta.items():
            where = f"transition ({q} {g} {a})"
            if q not in states or q2 not in states:
                problems.append(f"{where}: undeclared state")
            if g not in gammas:
                problems.append(f"{where}: undeclared stack symbol {g}")
            if a not in letters:
                problems.append(f"{where}: undeclared letter {a}")
            if op.kind in ("pop",) and not 1 <= op.k <= self.order:
                problems.append(f"{where}: {op} exceeds order {self.order}")
            if op.kind == "push" and not 2 <= op.k <= self.order:
                problems.append(f"{where}: {op} exceeds order {self.order}")
            if op.kind == "push1" and not 1 <= op.k <= self.order:
                problems.append(f"{where}: {op} exceeds order {self.order}")
            if op.sym is not None and (op.sym == BOTTOM or op.sym not in gammas):
                problems.append(f"{where}: bad payload {op.sym}")
            by_key.setdefault((q, g), set()).add(a)
        for (q, g), acts in sorted(by_key.items()):
            if EPS in acts and len(acts) > 1:
                problems.append(f"state {q} on {g}: silent move next to other moves")
        return problems

    def initial_config(self) -> Config:
        return Config(self.initial, LinkedStack.empty(self.order))

    def transition(self, c: Config, letter: str):
        return self.delta.get((c.state, c.stack.top_symbol().name, letter))

    def has_eps(self, c: Config) -> bool:
        return (c.state, c.stack.top_symbol().name, EPS) in self.delta

    def letters_at(self, c: Config) -> list[str]:
        """Defined non-silent letters at ``c``, in declaration order."""
        acts = self._letters_at.get((c.state, c.stack.top_symbol().name), ())
        return [a for a in self.letters if a in acts]

    # text format
    def to_text(self) -> str:
        lines = [
            f"(order {self.order})",
            "(input " + " ".join(self.letters) + ")" if self.letters else "(input)",
            "(stack-alphabet " + " ".join([BOTTOM] + [g for g in self.stack_alphabet if g != BOTTOM]) + ")",
            "(states " + " ".join(self.states) + ")",
            f"(initial {self.initial})",
            "(final " + " ".join(sorted(self.final)) + ")" if self.final else "(final)",
        ]
        for (q, g, a), (q2, op) in self.delta.items():
            lines.append(f"({q} {g} {a} -> {q2} {dump(op_to_sexpr(op))})")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Cpda":
        return parse_cpda(text)


def parse_cpda(text: str) -> Cpda:
    fields = {}
    delta = {}

    def add_transition(form):
        if len(form) != 6 or form[3] != "->":
            raise ParseError(f"bad transition: {dump(form)}")
        q, g, a, _, q2, op = form
        key = (q, g, a)
        if key in delta:
            raise ParseError(f"duplicate transition for {q} {g} {a}")
        delta[key] = (q2, op_from_sexpr(op))

    for form in parse_all(text):
        if not isinstance(form, list) or not form:
            raise ParseError(f"bad form: {dump(form)}")
        head = form[0]
        if head in ("order", "input", "stack-alphabet", "states", "initial", "final"):
            if head in fields:
                raise ParseError(f"duplicate block {head}")
            fields[head] = form[1:]
        elif head == "transitions":
            for t in form[1:]:
                add_transition(t)
        elif len(form) == 6 and form[3] == "->":
            add_transition(form)
        else:
            raise ParseError(f"unknown form: {dump(form)}")
    for key in ("order", "states", "initial"):
        if key not in fields:
            raise ParseError(f"missing block {key!r}")
    try:
        order = int(fields["order"][0])
    except (ValueError, IndexError):
        raise ParseError("bad order block") from None
    return Cpda(
        order=order,
        letters=[a for a in fields.get("input", []) if a != EPS],
        stack_alphabet=[g for g in fields.get("stack-alphabet", []) if g != BOTTOM],
        states=list(fields["states"]),
        initial=fields["initial"][0],
        final=frozenset(fields.get("final", [])),
        delta=delta,
    )


# ---------------------------------------------------------------- configuration graph


def step_reason(m: Cpda, c: Config, letter: str) -> tuple[Config | None, str]:
    """Successor of ``c`` on ``letter`` with a short reason when there is none."""
    tr = m.transition(c, letter)
    if tr is None:
        return None, f"no transition for ({c.state}, {c.stack.top_symbol().name}, {letter})"
    q2, op = tr
    try:
        return Config(q2, apply_op_strict(c.stack, op)), "ok"
    except StackUndefined as exc:
        return None, f"{op} undefined: {exc}"


def step_config(m: Cpda, c: Config, letter: str) -> Config | None:
    return step_reason(m, c, letter)[0]


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


DIVERGENT = _Sentinel("divergent")
EXHAUSTED = _Sentinel("exhausted")


def eps_path(m: Cpda, c: Config, budget: int = 10_000):
    """Configurations along the silent path from ``c`` and how it ends.

    Returns ``(path, outcome)`` where outcome is ``"stop"``, ``DIVERGENT`` or
    ``EXHAUSTED``; ``path[-1]`` is the last configuration visited.
    """
    path = [c]
    seen = {c}
    for _ in range(budget):
        if not m.has_eps(c):
            return path, "stop"
        nxt = step_config(m, c, EPS)
        if nxt is None:
            return path, "stop"
        if nxt in seen:
            return path, DIVERGENT
        seen.add(nxt)
        path.append(nxt)
        c = nxt
    if not m.has_eps(c) or step_config(m, c, EPS) is None:
        return path, "stop"
    return path, EXHAUSTED


def eps_closure(m: Cpda, c: Config, budget: int = 10_000):
    """Follow silent moves; the stopping configuration, DIVERGENT or EXHAUSTED."""
    path, outcome = eps_path(m, c, budget)
    if outcome == "stop":
        return path[-1]
    return outcome


def accepts(m: Cpda, word: Iterable[str], budget: int = 10_000) -> bool:
    """Whether ``word`` labels a run from the initial configuration to a final one."""
    c = m.initial_config()
    for a in word:
        if a == EPS:
            raise ValueError("words are over non-silent letters")
        closed = eps_closure(m, c, budget)
        if closed is DIVERGENT:
            raise DivergentEpsilon(f"silent loop before reading {a!r} from {c}")
        if closed is EXHAUSTED:
            raise EpsilonBudgetExhausted(f"silent path from {c} exceeds {budget} steps")
        c = step_config(m, closed, a)
        if c is None:
            return False
    path, outcome = eps_path(m, c, budget)
    if any(x.state in m.final for x in path):
        return True
    if outcome is EXHAUSTED:
        raise EpsilonBudgetExhausted(f"silent path from {c} exceeds {budget} steps")
    return False


def accepted_words(m: Cpda, max_len: int, budget: int = 10_000) -> set[tuple]:
    """All accepted words up to ``max_len`` by breadth-first exploration of the graph."""
    out = set()
    frontier = deque([((), m.initial_config())])
    while frontier:
        w, c = frontier.popleft()
        path, outcome = eps_path(m, c, budget)
        if any(x.state in m.final for x in path):
            out.add(w)
        if outcome != "stop" or len(w) == max_len:
            continue
        last = path[-1]
        for a in m.letters:
            nxt = step_config(m, last, a)
            if nxt is not None:
                frontier.append((w + (a,), nxt))
    return out


def generate_tree(
    m: Cpda,
    labeling: Mapping[str, str],
    alphabet: Mapping[str, int],
    max_depth: int = 10,
    eps_budget: int = 10_000,
    renumber: bool = True,
) -> PartialTree:
    """Tree generated by ``m`` and a state labelling, cut at ``max_depth``.

    Children of a node are the defined non-silent letters at its
    configuration. With ``renumber`` they are numbered by rank in the input
    declaration order; otherwise the letters must be exactly ``1..arity``.
    """
    labels = {}
    closure_cache = {}
    todo = [((), m.initial_config())]
    while todo:
        node, c = todo.pop()
        closed = closure_cache.get(c)
        if closed is None:
            closed = eps_closure(m, c, eps_budget)
            closure_cache[c] = closed
        if closed is DIVERGENT or closed is EXHAUSTED:
            labels[node] = BOTTOM
            continue
        if closed.state not in labeling:
            raise ArityMismatch(f"state {closed.state} has no label (at {closed})")
        label = labeling[closed.state]
        arity = alphabet[label]
        acts = m.letters_at(closed)
        if renumber:
            ok = len(acts) == arity
        else:
            ok = acts == [str(i) for i in range(1, arity + 1)]
        if not ok:
            raise ArityMismatch(
                f"configuration {closed} labelled {label} (arity {arity}) has moves {acts}"
            )
        if len(node) >= max_depth and arity > 0:
            labels[node] = BOTTOM
            continue
        labels[node] = label
        for i, a in enumerate(acts, start=1):
            nxt, why = step_reason(m, closed, a)
            if nxt is None:
                raise ArityMismatch(f"configuration {closed}: move {a} fails ({why})")
            todo.append((node + (i,), nxt))
    return PartialTree(labels)


def config_graph(m: Cpda, max_nodes: int = 2_000, max_height: int | None = None):
    """Reachable part of the raw transition graph, silent edges included.

    Returns ``(nodes, edges, truncated)`` with ``edges[c]`` a dict letter ->
    successor. Nodes past ``max_nodes`` are left unexpanded and listed in
    ``truncated``.
    """
    start = m.initial_config()
    nodes = [start]
    index = {start}
    edges = {}
    truncated = set()
    queue = deque([start])
    while queue:
        c = queue.popleft()
        if len(edges) >= max_nodes:
            truncated.add(c)
            continue
        out = {}
        for a in [EPS] + list(m.letters):
            nxt = step_config(m, c, a)
            if nxt is None:
                continue
            out[a] = nxt
            if nxt not in index:
                index.add(nxt)
                nodes.append(nxt)
                queue.append(nxt)
        edges[c] = out
    truncated |= {c for c in nodes if c not in edges}
    return nodes, edges, truncated


# ---------------------------------------------------------------- synchronisation


@dataclass
class SyncResult:
    ok: bool
    word: tuple = ()
    step: int = -1
    detail: str = ""

    def __bool__(self):
        return self.ok


def synchronised_check(m1: Cpda, m2: Cpda, words: Iterable[Iterable[str]]) -> SyncResult:
    """Replay both machines on each word (silent letters included literally).

    At every step the two transitions must both be undefined, or both defined
    with the same operation type; the resulting stacks must have equal shapes.
    """
    for word in words:
        word = tuple(word)
        c1, c2 = m1.initial_config(), m2.initial_config()
        for i, a in enumerate(word):
            t1, t2 = m1.transition(c1, a), m2.transition(c2, a)
            if t1 is None and t2 is None:
                break
            if (t1 is None) != (t2 is None):
                return SyncResult(False, word, i, f"only one machine moves on {a!r}")
            if t1[1].op_type != t2[1].op_type:
                return SyncResult(False, word, i, f"{t1[1]} vs {t2[1]} on {a!r}")
            s1, s2 = apply_op(c1.stack, t1[1]), apply_op(c2.stack, t2[1])
            if (s1 is None) != (s2 is None):
                return SyncResult(False, word, i, "operation defined on one side only")
            if s1 is None:
                break
            if stack_shape(s1) != stack_shape(s2):
                return SyncResult(False, word, i, "stack shapes differ")
            c1, c2 = Config(t1[0], s1), Config(t2[0], s2)
    return SyncResult(True)


def all_words(letters: Iterable[str], max_len: int):
    letters = list(letters)
    layer = [()]
    for _ in range(max_len + 1):
        yield from layer
        layer = [w + (a,) for w in layer for a in letters]


def synchronised_product(m: Cpda, dfa_delta: Mapping, dfa_initial, dfa_final=None) -> Cpda:
    """Product of ``m`` with a finite automaton reading the same letters.

    ``dfa_delta`` maps ``(p, letter)`` to ``p'``; a missing silent entry keeps
    ``p`` unchanged. Product states are named ``q|p``; final when both
    components are (all DFA states count as final when ``dfa_final`` is None).
    """
    dfa_states = {dfa_initial} | {p for (p, _) in dfa_delta} | set(dfa_delta.values())
    dfa_states = sorted(dfa_states, key=str)
    dfa_final = set(dfa_states) if dfa_final is None else set(dfa_final)

    def name(q, p):
        return f"{q}|{p}"

    delta = {}
    for (q, g, a), (q2, op) in m.delta.items():
        for p in dfa_states:
            if (p, a) in dfa_delta:
                p2 = dfa_delta[(p, a)]
            elif a == EPS:
                p2 = p
            else:
                continue
            delta[(name(q, p), g, a)] = (name(q2, p2), op)
    states = [name(q, p) for q in m.states for p in dfa_states]
    final = {name(q, p) for q in m.final for p in dfa_final}
    return Cpda(m.order, list(m.letters), list(m.stack_alphabet), states,
                name(m.initial, dfa_initial), frozenset(final), delta)


# ---------------------------------------------------------------- labelling files


def parse_labeling(text: str) -> tuple[RankedAlphabet, dict]:
    """Read a ``.map`` file: a terminals block and ``(label q a)`` entries."""
    terminals = None
    labels = {}
    for form in parse_all(text):
        if not isinstance(form, list) or not form:
            raise ParseError(f"bad form: {dump(form)}")
        if form[0] == "terminals":
            terminals = {}
            for entry in form[1:]:
                if not isinstance(entry, list) or len(entry) != 2:
                    raise ParseError(f"bad terminal entry: {dump(entry)}")
                terminals[entry[0]] = int(entry[1])
        elif form[0] == "label" and len(form) == 3:
            if form[1] in labels:
                raise ParseError(f"state {form[1]} labelled twice")
            labels[form[1]] = form[2]
        else:
            raise ParseError(f"unknown form: {dump(form)}")
    if terminals is None:
        raise ParseError("missing terminals block")
    alphabet = RankedAlphabet(terminals)
    for q, a in labels.items():
        if a not in alphabet:
            raise ParseError(f"label {a} of {q} is not a terminal")
    return alphabet, labels


def format_labeling(alphabet: RankedAlphabet, labels: Mapping[str, str]) -> str:
    lines = ["(terminals " + " ".join(f"({a} {k})" for a, k in alphabet.user_items()) + ")"]
    lines += [f"(label {q} {a})" for q, a in labels.items()]
    return "\n".join(lines) + "\n"
