"""Higher-order recursion schemes, collapsible pushdown automata, parity games
and tree automata, with exact solvers on finite instances and three-valued
analysis of generated tree prefixes."""

from .core import (
    BOTTOM,
    HocpdaError,
    PartialTree,
    RankedAlphabet,
    first_difference,
    infer_type,
    tree_leq,
    type_order,
)
from .cpda import Cpda, LinkedStack, accepts, apply_op, generate_tree, parse_stack, stack_shape
from .games import ParityArena, acceptance_game, brute_force_solve, solve
from .hors import Budget, Scheme, bottom_project, step, unfold_value_tree, validate
from .kernels import BACKEND
from .mucalc import eps_translate, eval_bounded, parse_formula, reflect_tree
from .transforms import contract_ticks, pair_mark, tick_transform
from .treeauto import (
    ParityTreeAutomaton,
    TreeWalkingAutomaton,
    annotate_tree,
    bounded_accepts,
    finite_accepts,
    select_marking,
    twa_run,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
