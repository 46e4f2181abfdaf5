"""Command-line front end: ``hocpda unfold``, ``hocpda check ...``, ``hocpda diff-trees``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .core import BOTTOM, HocpdaError, PartialTree, first_difference, node_str, parse_node
from .cpda import Cpda, accepts, generate_tree, parse_labeling
from .games import ParityArena, solve
from .hors import Budget, InvalidScheme, Scheme, unfold_value_tree, validate
from .mucalc import format_values, parse_formula, reflect_prefix, eval_bounded
from .sexpr import ParseError
from .transforms import tick_transform
from .treeauto import (
    NO,
    ParityTreeAutomaton,
    TreeWalkingAutomaton,
    annotate_tree,
    bounded_accepts,
    select_marking,
    twa_run,
)

DEFAULT_DEPTH = 10
DEFAULT_STEPS = 100_000


class UsageError(Exception):
    pass


def env_budget() -> tuple[int, int]:
    """Defaults, overridden by ``HOCPDA_BUDGET`` as ``DEPTH`` or ``DEPTH,STEPS``."""
    raw = os.environ.get("HOCPDA_BUDGET", "").strip()
    if not raw:
        return DEFAULT_DEPTH, DEFAULT_STEPS
    parts = raw.replace(":", ",").split(",")
    try:
        depth = int(parts[0])
        steps = int(parts[1]) if len(parts) > 1 and parts[1] else DEFAULT_STEPS
    except ValueError as exc:
        raise UsageError(f"bad HOCPDA_BUDGET {raw!r}") from exc
    return depth, steps


def budget_from(args) -> Budget:
    depth, steps = env_budget()
    if getattr(args, "depth", None) is not None:
        depth = args.depth
    if getattr(args, "steps", None) is not None:
        steps = args.steps
    return Budget(depth, steps)


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def load_scheme(path: str) -> Scheme:
    s = Scheme.parse(read_text(path))
    problems = validate(s)
    if problems:
        raise InvalidScheme(problems)
    return s


def load_tree_source(path: str, labeling: str | None, budget: Budget) -> PartialTree:
    """A tree from a ``.tree`` file, or the generated prefix of a ``.hrs``/``.cpda``."""
    suffix = Path(path).suffix
    if suffix == ".hrs":
        return unfold_value_tree(load_scheme(path), budget)
    if suffix == ".cpda":
        if labeling is None:
            raise UsageError(f"{path}: a CPDA needs --labeling")
        m = Cpda.parse(read_text(path))
        alphabet, labels = parse_labeling(read_text(labeling))
        return generate_tree(m, labels, alphabet, budget.max_depth, budget.max_steps)
    return PartialTree.parse(read_text(path))


def formula_arg(text: str):
    p = Path(text)
    if p.suffix == ".mu" or p.is_file():
        text = p.read_text(encoding="utf-8")
    return parse_formula(text)


def _word(line: str) -> list[str]:
    line = line.strip()
    return line.split() if any(c.isspace() for c in line) else list(line)


# ---------------------------------------------------------------- commands


def cmd_unfold(args, out) -> int:
    t = load_tree_source(args.source, args.labeling, budget_from(args))
    out.write(t.to_text() + "\n")
    return 0


def check_accepts(args, out) -> int:
    if Path(args.machine).suffix == ".pta":
        if args.tree is None:
            raise UsageError("a tree automaton needs a tree argument")
        aut = ParityTreeAutomaton.parse(read_text(args.machine))
        t = load_tree_source(args.tree, args.labeling, budget_from(args))
        answer = bounded_accepts(aut, t)
        out.write(answer + "\n")
        return 1 if answer == NO else 0
    m = Cpda.parse(read_text(args.machine))
    source = read_text(args.tree) if args.tree else sys.stdin.read()
    status = 0
    for line in source.splitlines():
        if not line.strip() and line != "":
            continue
        ok = accepts(m, _word(line), budget_from(args).max_steps)
        out.write(("true" if ok else "false") + "\n")
        if not ok:
            status = 1
    return status


def check_solve(args, out) -> int:
    arena = ParityArena.parse(read_text(args.arena))
    out.write(solve(arena).to_text(arena))
    return 0


def check_mu(args, out) -> int:
    t = load_tree_source(args.source, args.labeling, budget_from(args))
    out.write(format_values(eval_bounded(formula_arg(args.formula), t)))
    return 0


def check_reflect(args, out) -> int:
    t = load_tree_source(args.source, args.labeling, budget_from(args))
    r = reflect_prefix(t, formula_arg(args.formula))
    out.write(r.tree.to_text() + "\n")
    for u in r.unknown:
        out.write(f"unknown {node_str(u)}\n")
    return 0


def check_select(args, out) -> int:
    aut = ParityTreeAutomaton.parse(read_text(args.automaton))
    t = load_tree_source(args.tree, None, budget_from(args))
    marked = select_marking(aut, t, args.bits)
    if marked is None:
        out.write("none\n")
        return 1
    out.write(marked.to_text() + "\n")
    return 0


def check_twa(args, out) -> int:
    w = TreeWalkingAutomaton.parse(read_text(args.walker))
    t = load_tree_source(args.tree, None, budget_from(args))
    automata = [ParityTreeAutomaton.parse(read_text(p)) for p in args.annotate or ()]
    if automata or any(f != "base" for f in w.reads):
        t = annotate_tree(t, automata)
    result = twa_run(w, t, parse_node(args.start), args.fuel)
    out.write(str(result) + "\n")
    return 0 if result.kind == "accepted" else 1


def check_tick(args, out) -> int:
    out.write(tick_transform(load_scheme(args.scheme)).to_text())
    return 0


def cmd_diff_trees(args, out) -> int:
    budget = budget_from(args)
    t1 = load_tree_source(args.left, args.labeling, budget)
    t2 = load_tree_source(args.right, args.labeling, budget)
    ar1, ar2 = _arities(t1), _arities(t2)
    clash = sorted(a for a in ar1.keys() & ar2.keys() if ar1[a] != ar2[a])
    if clash:
        raise UsageError(f"alphabet mismatch on {', '.join(clash)}")
    if args.depth is not None:
        t1, t2 = t1.truncate(args.depth), t2.truncate(args.depth)
    diff = first_difference(t1, t2)
    if diff is None:
        out.write("equal\n")
        return 0
    u, a, b = diff
    out.write(f"{node_str(u)} {a or '-'} {b or '-'}\n")
    return 1


def _arities(t: PartialTree) -> dict:
    return {a: len(t.children(u)) for u, a in t.items() if a != BOTTOM}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hocpda", description="Recursion schemes, CPDA, games and tree automata at desk scale.")
    sub = p.add_subparsers(dest="command", required=True)

    def budget_flags(q):
        q.add_argument("--depth", type=int, help="truncation depth (default 10)")
        q.add_argument("--steps", type=int, help="per-node step budget (default 100000)")

    q = sub.add_parser("unfold", help="print the generated tree prefix")
    q.add_argument("source", help=".hrs scheme or .cpda automaton")
    q.add_argument("--labeling", help=".map state labelling for a CPDA")
    budget_flags(q)
    q.set_defaults(func=cmd_unfold)

    q = sub.add_parser("diff-trees", help="compare two tree prefixes")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--labeling", help=".map labelling for .cpda inputs")
    budget_flags(q)
    q.set_defaults(func=cmd_diff_trees)

    check = sub.add_parser("check", help="run a decision or analysis").add_subparsers(dest="what", required=True)

    q = check.add_parser("accepts", help="CPDA word acceptance (words on stdin) or tree acceptance")
    q.add_argument("machine", help=".cpda or .pta")
    q.add_argument("tree", nargs="?", help="tree source for a .pta; word file for a .cpda")
    q.add_argument("--labeling")
    budget_flags(q)
    q.set_defaults(func=check_accepts)

    q = check.add_parser("solve", help="solve a parity arena")
    q.add_argument("arena")
    q.set_defaults(func=check_solve)

    for name, func, helptext in (("mu", check_mu, "three-valued formula values per node"), ("reflect", check_reflect, "bar the nodes where a formula holds")):
        q = check.add_parser(name, help=helptext)
        q.add_argument("source", help=".hrs, .cpda or .tree")
        q.add_argument("formula", help=".mu file or formula text")
        q.add_argument("--labeling")
        budget_flags(q)
        q.set_defaults(func=func)

    q = check.add_parser("select", help="pick a marking accepted by an automaton")
    q.add_argument("automaton", help=".pta over label#bits")
    q.add_argument("tree", help=".tree, or a source to unfold")
    q.add_argument("--bits", type=int, default=1, help="marking width")
    budget_flags(q)
    q.set_defaults(func=check_select)

    q = check.add_parser("twa", help="run a tree-walking automaton")
    q.add_argument("walker", help=".twa file")
    q.add_argument("tree")
    q.add_argument("--start", default="ε", help="start node, e.g. 12 or ε")
    q.add_argument("--annotate", action="append", help=".pta defining a direction relation (repeatable)")
    q.add_argument("--fuel", type=int)
    budget_flags(q)
    q.set_defaults(func=check_twa)

    q = check.add_parser("tick", help="print the ticked scheme")
    q.add_argument("scheme")
    q.set_defaults(func=check_tick)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except InvalidScheme as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 2
    except (HocpdaError, ParseError, UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
