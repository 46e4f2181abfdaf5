"""Finite parity games: arenas, attractors, Zielonka's algorithm and a brute-force oracle.

Winning condition: Éloïse wins a play when the smallest colour seen infinitely
often is even.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .core import BOTTOM, HocpdaError, PartialTree
from .kernels import attractor as _attractor_kernel
from .sexpr import ParseError, dump, parse_all

ELOISE = "E"
ABELARD = "A"
_PLAYER_BIT = {ELOISE: 0, ABELARD: 1}


class DeadEnd(HocpdaError):
    pass


class TooLarge(HocpdaError):
    pass


class ArityMismatch(HocpdaError):
    pass


class ParityArena:
    """Immutable finite arena. Vertex ids are any hashable values."""

    def __init__(self, vertices: Iterable[tuple], edges: Iterable[tuple]):
        self.ids = []
        self.index = {}
        owners = []
        colors = []
        for vid, owner, color in vertices:
            if vid in self.index:
                raise ValueError(f"duplicate vertex {vid!r}")
            if owner not in _PLAYER_BIT:
                raise ValueError(f"bad owner {owner!r} for {vid!r}")
            color = int(color)
            if color < 0:
                raise ValueError(f"negative colour at {vid!r}")
            self.index[vid] = len(self.ids)
            self.ids.append(vid)
            owners.append(_PLAYER_BIT[owner])
            colors.append(color)
        n = len(self.ids)
        succ = [set() for _ in range(n)]
        for u, v in edges:
            if u not in self.index or v not in self.index:
                raise ValueError(f"edge {u!r} -> {v!r} uses an unknown vertex")
            succ[self.index[u]].add(self.index[v])
        for i in range(n):
            if not succ[i]:
                raise DeadEnd(f"vertex {self.ids[i]!r} has no successor")
        self.owner = bytes(owners)
        self.color = tuple(colors)
        self.succ = tuple(tuple(sorted(s)) for s in succ)
        pred = [[] for _ in range(n)]
        for u in range(n):
            for v in self.succ[u]:
                pred[v].append(u)
        self.pred = tuple(tuple(p) for p in pred)
        self.succ_ptr, self.succ_idx = _csr(self.succ)
        self.pred_ptr, self.pred_idx = _csr(self.pred)

    def __len__(self):
        return len(self.ids)

    @property
    def vertices(self):
        return list(self.ids)

    def owner_of(self, vid) -> str:
        return ELOISE if self.owner[self.index[vid]] == 0 else ABELARD

    def color_of(self, vid) -> int:
        return self.color[self.index[vid]]

    def successors(self, vid) -> list:
        return [self.ids[j] for j in self.succ[self.index[vid]]]

    def edges(self):
        for u in range(len(self.ids)):
            for v in self.succ[u]:
                yield self.ids[u], self.ids[v]

    def colors(self) -> set:
        return set(self.color)

    # text format
    def to_text(self) -> str:
        lines = [f"(vertex {vid} {self.owner_of(vid)} {self.color_of(vid)})" for vid in self.ids]
        lines += [f"(edge {u} {v})" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ParityArena":
        vertices, edges = [], []
        for form in parse_all(text):
            if isinstance(form, list) and form and form[0] == "vertex" and len(form) == 4:
                try:
                    vertices.append((form[1], form[2], int(form[3])))
                except ValueError:
                    raise ParseError(f"bad colour in {dump(form)}") from None
            elif isinstance(form, list) and form and form[0] == "edge" and len(form) == 3:
                edges.append((form[1], form[2]))
            else:
                raise ParseError(f"unknown arena form: {dump(form)}")
        return cls(vertices, edges)

    def __eq__(self, other):
        if not isinstance(other, ParityArena):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.owner == other.owner
            and self.color == other.color
            and self.succ == other.succ
        )


def _csr(adj):
    ptr = array("i", [0])
    idx = array("i")
    for row in adj:
        idx.extend(row)
        ptr.append(len(idx))
    return ptr, idx


def _mask(n, members):
    m = bytearray(n)
    for v in members:
        m[v] = 1
    return m


# ---------------------------------------------------------------- attractors


def attractor_idx(a: ParityArena, player: str, target, active=None):
    """Kernel call on vertex numbers; returns ``(set, strategy array)``."""
    n = len(a)
    act = bytearray(b"\x01") * n if active is None else active
    tgt = target if isinstance(target, bytearray) else _mask(n, target)
    attr, strat = _attractor_kernel(
        a.succ_ptr, a.succ_idx, a.pred_ptr, a.pred_idx, a.owner, act, tgt, _PLAYER_BIT[player]
    )
    return attr, strat


def attractor(a: ParityArena, player: str, target: Iterable[Hashable]) -> set:
    """Vertices from which ``player`` can force a visit to ``target``."""
    idx = [a.index[v] for v in target]
    attr, _ = attractor_idx(a, player, idx)
    return {a.ids[i] for i in range(len(a)) if attr[i]}


# ---------------------------------------------------------------- Zielonka


@dataclass
class GameSolution:
    win_e: frozenset
    win_a: frozenset
    strategy_e: dict = field(default_factory=dict)
    strategy_a: dict = field(default_factory=dict)

    def winner(self, vid) -> str:
        return ELOISE if vid in self.win_e else ABELARD

    def to_text(self, arena: ParityArena) -> str:
        order = {v: i for i, v in enumerate(arena.ids)}
        key = order.__getitem__
        lines = [
            "W_E " + " ".join(str(v) for v in sorted(self.win_e, key=key)),
            "W_A " + " ".join(str(v) for v in sorted(self.win_a, key=key)),
        ]
        for v in sorted(self.strategy_e, key=key):
            lines.append(f"strategy E {v} {self.strategy_e[v]}")
        for v in sorted(self.strategy_a, key=key):
            lines.append(f"strategy A {v} {self.strategy_a[v]}")
        return "\n".join(line.rstrip() for line in lines) + "\n"


def solve(a: ParityArena) -> GameSolution:
    """Exact winning regions and positional winning strategies (Zielonka)."""
    n = len(a)
    strat = [array("i", [-1]) * n, array("i", [-1]) * n]
    full = bytearray(b"\x01") * n
    w = _zielonka(a, full, strat)
    win_e = frozenset(a.ids[i] for i in range(n) if w[i] == 0)
    win_a = frozenset(a.ids[i] for i in range(n) if w[i] == 1)
    assert len(win_e) + len(win_a) == n
    se = {a.ids[v]: a.ids[strat[0][v]] for v in range(n) if w[v] == 0 and a.owner[v] == 0}
    sa = {a.ids[v]: a.ids[strat[1][v]] for v in range(n) if w[v] == 1 and a.owner[v] == 1}
    return GameSolution(win_e, win_a, se, sa)


def _zielonka(a: ParityArena, active: bytearray, strat) -> bytearray:
    """Winner per vertex (0 Éloïse, 1 Abelard; 2 outside ``active``).

    Writes positional choices for the winner into ``strat`` on the winner's
    own vertices.
    """
    n = len(a)
    result = bytearray(b"\x02") * n
    verts = [v for v in range(n) if active[v]]
    if not verts:
        return result
    c = min(a.color[v] for v in verts)
    p = c % 2
    opp = 1 - p
    top = bytearray(n)
    for v in verts:
        if a.color[v] == c:
            top[v] = 1
    attr, astrat = _attractor_kernel(
        a.succ_ptr, a.succ_idx, a.pred_ptr, a.pred_idx, a.owner, active, top, p
    )
    rest = bytearray(active)
    for v in verts:
        if attr[v]:
            rest[v] = 0
    sub = _zielonka(a, rest, strat)
    if not any(sub[v] == opp for v in verts):
        for v in verts:
            result[v] = p
            if a.owner[v] != p:
                continue
            if attr[v]:
                if top[v]:
                    strat[p][v] = next(w for w in a.succ[v] if active[w])
                else:
                    strat[p][v] = astrat[v]
        return result
    opp_region = bytearray(n)
    for v in verts:
        if sub[v] == opp:
            opp_region[v] = 1
    battr, bstrat = _attractor_kernel(
        a.succ_ptr, a.succ_idx, a.pred_ptr, a.pred_idx, a.owner, active, opp_region, opp
    )
    rest2 = bytearray(active)
    for v in verts:
        if battr[v]:
            rest2[v] = 0
    sub2 = _zielonka(a, rest2, strat)
    for v in verts:
        if battr[v]:
            result[v] = opp
            if a.owner[v] == opp and not opp_region[v]:
                strat[opp][v] = bstrat[v]
        else:
            result[v] = sub2[v]
    return result


# ---------------------------------------------------------------- verification


def _closure(succ_masks, within):
    """reach[v]: vertices reachable from v in one or more steps inside ``within``."""
    n = len(succ_masks)
    reach = [succ_masks[v] & within if (within >> v) & 1 else 0 for v in range(n)]
    changed = True
    while changed:
        changed = False
        for v in range(n):
            r = reach[v]
            acc = r
            m = r
            while m:
                low = m & -m
                acc |= reach[low.bit_length() - 1]
                m ^= low
            if acc != r:
                reach[v] = acc
                changed = True
    return reach


def _losing_for(succ_masks, colors, vertices_mask, player_bit):
    """Vertices from which some path reaches a cycle won by the other player.

    ``succ_masks`` describes a graph where only ``player_bit``'s opponent still
    chooses, i.e. one whose every path is a possible play.
    """
    n = len(succ_masks)
    bad = 0
    bad_parity = 1 - player_bit
    for c in sorted(set(colors[v] for v in range(n) if (vertices_mask >> v) & 1)):
        if c % 2 != bad_parity:
            continue
        within = 0
        for v in range(n):
            if (vertices_mask >> v) & 1 and colors[v] >= c:
                within |= 1 << v
        reach = _closure(succ_masks, within)
        for v in range(n):
            if (within >> v) & 1 and colors[v] == c and (reach[v] >> v) & 1:
                bad |= 1 << v
    if not bad:
        return 0
    reach = _closure(succ_masks, vertices_mask)
    out = bad
    for v in range(n):
        if (vertices_mask >> v) & 1 and reach[v] & bad:
            out |= 1 << v
    return out


def verify_strategy(a: ParityArena, region: Iterable, strategy: dict, player: str) -> list[str]:
    """Check that ``strategy`` keeps plays in ``region`` and wins them all."""
    problems = []
    bit = _PLAYER_BIT[player]
    reg = {a.index[v] for v in region}
    n = len(a)
    region_mask = 0
    for v in reg:
        region_mask |= 1 << v
    succ_masks = [0] * n
    for v in reg:
        if a.owner[v] == bit:
            vid = a.ids[v]
            if vid not in strategy:
                problems.append(f"no move at {vid!r}")
                continue
            w = a.index.get(strategy[vid])
            if w is None or w not in a.succ[v]:
                problems.append(f"move {vid!r} -> {strategy[vid]!r} is not an edge")
                continue
            if w not in reg:
                problems.append(f"move {vid!r} -> {strategy[vid]!r} leaves the region")
            succ_masks[v] = 1 << w
        else:
            for w in a.succ[v]:
                if w not in reg:
                    problems.append(f"opponent escapes {a.ids[v]!r} -> {a.ids[w]!r}")
                succ_masks[v] |= 1 << w
    if problems:
        return problems
    lost = _losing_for(succ_masks, a.color, region_mask, bit)
    if lost:
        bad = [a.ids[v] for v in range(n) if (lost >> v) & 1][:5]
        problems.append(f"opponent reaches a losing cycle from {bad!r}")
    return problems


# ---------------------------------------------------------------- brute force

BRUTE_FORCE_LIMIT = 12


def brute_force_solve(a: ParityArena) -> tuple[frozenset, frozenset]:
    """Winning regions by enumerating positional strategies of each player."""
    n = len(a)
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{n} vertices exceed the brute-force limit {BRUTE_FORCE_LIMIT}")
    full = (1 << n) - 1
    regions = []
    for bit in (0, 1):
        mine = [v for v in range(n) if a.owner[v] == bit]
        base = [0] * n
        for v in range(n):
            if a.owner[v] != bit:
                for w in a.succ[v]:
                    base[v] |= 1 << w
        won = 0
        for choice in itertools.product(*(a.succ[v] for v in mine)):
            masks = list(base)
            for v, w in zip(mine, choice):
                masks[v] = 1 << w
            won |= full & ~_losing_for(masks, a.color, full, bit)
            if won == full:
                break
        regions.append(frozenset(a.ids[v] for v in range(n) if (won >> v) & 1))
    return regions[0], regions[1]


# ---------------------------------------------------------------- acceptance game

SINK = ("sink",)


def acceptance_game(aut, t: PartialTree, bottom_color: int | None = None) -> ParityArena:
    """Arena whose Éloïse-win from ``("m", (), initial)`` means ``aut`` accepts ``t``.

    Main vertices ``("m", u, q)`` belong to Éloïse, who picks a transition and
    moves to ``("t", u, q, i)`` where Abelard picks a child. At arity-0 nodes
    the main vertex loops with colour 0 or 1 according to the leaf table.
    A main vertex with no usable transition moves to a losing sink.

    ⊥ nodes are rejected unless ``bottom_color`` is given, in which case they
    loop with that colour.
    """
    if bottom_color is None and t.has_bottom():
        raise ValueError("acceptance game needs a tree without ⊥")
    top = max(aut.color.values(), default=0)
    vertices = []
    edges = []
    need_sink = False
    for u in t.nodes():
        a = t[u]
        if a == BOTTOM:
            for q in aut.states:
                main = ("m", u, q)
                vertices.append((main, ELOISE, bottom_color))
                edges.append((main, main))
            continue
        if a not in aut.alphabet:
            raise ArityMismatch(f"label {a} at {u} is not in the automaton alphabet")
        k = aut.alphabet[a]
        kids = t.children(u)
        if len(kids) != k:
            raise ArityMismatch(f"node {u} labelled {a} has {len(kids)} children, arity {k}")
        for q in aut.states:
            main = ("m", u, q)
            if k == 0:
                vertices.append((main, ELOISE, 0 if (q, a) in aut.acc else 1))
                edges.append((main, main))
                continue
            vertices.append((main, ELOISE, aut.color[q]))
            trans = aut.transitions_for(q, a)
            if not trans:
                need_sink = True
                edges.append((main, SINK))
            for i, qs in enumerate(trans):
                mid = ("t", u, q, i)
                vertices.append((mid, ABELARD, top))
                edges.append((main, mid))
                for d, qd in enumerate(qs, start=1):
                    edges.append((mid, ("m", u + (d,), qd)))
    if need_sink:
        vertices.append((SINK, ELOISE, 1))
        edges.append((SINK, SINK))
    return ParityArena(vertices, edges)
