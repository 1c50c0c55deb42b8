"""Enumerate the goals called by a clause body, with their source layout."""

from __future__ import annotations

from typing import Iterator, Optional, Tuple

from plport.reader import Pos
from plport.terms import Atom, Compound, Term, Var

# Control constructs and meta-predicates: functor/arity -> goal argument
# positions (0-based).  Everything else is a plain call.
META_ARGS = {
    (",", 2): (0, 1),
    (";", 2): (0, 1),
    ("->", 2): (0, 1),
    ("*->", 2): (0, 1),
    ("\\+", 1): (0,),
    ("call", 1): (0,),
    ("once", 1): (0,),
    ("ignore", 1): (0,),
    ("forall", 2): (0, 1),
    ("findall", 3): (1,),
    ("findall", 4): (1,),
    ("bagof", 3): (1,),
    ("setof", 3): (1,),
    ("aggregate_all", 3): (1,),
    ("catch", 3): (0, 2),
    ("call_cleanup", 2): (0, 1),
    ("setup_call_cleanup", 3): (0, 1, 2),
    ("when", 2): (1,),
    ("freeze", 2): (1,),
    ("time", 1): (0,),
}

TRANSPARENT = frozenset(META_ARGS)


def goal_indicator(goal: Term) -> Optional[Tuple[Optional[str], str, int]]:
    """(module, name, arity) of a callable term, or None."""
    module = None
    while isinstance(goal, Compound) and goal.functor == ":" and len(goal.args) == 2:
        if not isinstance(goal.args[0], Atom):
            return None
        module, goal = goal.args[0].name, goal.args[1]
    if isinstance(goal, Atom):
        return module, goal.name, 0
    if isinstance(goal, Compound):
        return module, goal.functor, len(goal.args)
    return None


def iter_goals(body: Term, pos: Optional[Pos]) -> Iterator[Tuple[Term, Optional[Pos]]]:
    """Yield (goal, pos) for every called goal, control constructs included.

    ``Pos`` may be None when layout is not available.
    """
    stack = [(body, pos)]
    while stack:
        goal, gpos = stack.pop()
        if isinstance(goal, Var):
            continue
        yield goal, gpos
        inner, ipos = goal, gpos
        # Strip module qualification and ^ for bagof/setof.
        if isinstance(inner, Compound) and inner.functor == ":" and len(inner.args) == 2:
            inner, ipos = inner.args[1], (ipos.arg(1) if ipos else None)
            if isinstance(inner, Var):
                continue
            key = (inner.functor, len(inner.args)) if isinstance(inner, Compound) else None
            if key not in META_ARGS:
                continue
        if not isinstance(inner, Compound):
            continue
        key = (inner.functor, len(inner.args))
        positions = META_ARGS.get(key)
        if positions is None:
            continue
        for i in reversed(positions):
            sub, spos = inner.args[i], (ipos.arg(i) if ipos else None)
            if inner.functor in ("bagof", "setof", "aggregate_all"):
                while isinstance(sub, Compound) and sub.functor == "^" and len(sub.args) == 2:
                    sub, spos = sub.args[1], (spos.arg(1) if spos else None)
            stack.append((sub, spos))


def is_control(goal: Term) -> bool:
    info = goal_indicator(goal)
    if info is None:
        return True
    _, name, arity = info
    return (name, arity) in (( ",", 2), (";", 2), ("->", 2), ("*->", 2), ("\\+", 1)) or (
        name in ("true", "fail", "false", "!") and arity == 0
    )
