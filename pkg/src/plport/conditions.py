"""Static evaluation of ``:- if(Cond)`` conditions for one dialect.

Conditions are arbitrary goals, so the evaluator answers in three-valued
(Kleene) logic: goals it recognizes are decided from the dialect profile and
the catalog, everything else is ``unknown``.
"""

from __future__ import annotations

import enum
from typing import Dict, List, Optional, Tuple

from plport.dialect_db import Catalog, DialectVersion
from plport.profiles import get_profile
from plport.reader import CondBlock, library_name
from plport.terms import LIST_FUNCTORS, NIL, Atom, Compound, Float, Int, Term, Var, compare_terms, list_view


class CondValue(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __and__(self, other: "CondValue") -> "CondValue":
        if self is CondValue.FALSE or other is CondValue.FALSE:
            return CondValue.FALSE
        if self is CondValue.TRUE and other is CondValue.TRUE:
            return CondValue.TRUE
        return CondValue.UNKNOWN

    def __or__(self, other: "CondValue") -> "CondValue":
        if self is CondValue.TRUE or other is CondValue.TRUE:
            return CondValue.TRUE
        if self is CondValue.FALSE and other is CondValue.FALSE:
            return CondValue.FALSE
        return CondValue.UNKNOWN

    def __invert__(self) -> "CondValue":
        if self is CondValue.TRUE:
            return CondValue.FALSE
        if self is CondValue.FALSE:
            return CondValue.TRUE
        return CondValue.UNKNOWN

    @classmethod
    def of(cls, b: bool) -> "CondValue":
        return cls.TRUE if b else cls.FALSE


T, F, U = CondValue.TRUE, CondValue.FALSE, CondValue.UNKNOWN

# Variables whose value became uncertain (bound inside a disjunction or an
# unknown goal) map to this marker; any later test on them is unknown.
_POISON = object()

Env = Dict[Var, object]

_COMPARE = {
    "@<": lambda c: c < 0,
    "@>": lambda c: c > 0,
    "@=<": lambda c: c <= 0,
    "@>=": lambda c: c >= 0,
    "==": lambda c: c == 0,
    "\\==": lambda c: c != 0,
}


_ARITH_COMPARE = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "=<": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
}

_ARITH_OPS = {
    ("+", 2): lambda a, b: a + b,
    ("-", 2): lambda a, b: a - b,
    ("*", 2): lambda a, b: a * b,
    ("-", 1): lambda a: -a,
    ("+", 1): lambda a: a,
    ("max", 2): max,
    ("min", 2): min,
    ("abs", 1): abs,
}


def _arith_value(t: Term):
    """Value of a bound, simple arithmetic expression, else None."""
    if isinstance(t, (Int, Float)):
        return t.value
    if isinstance(t, Compound):
        fn = _ARITH_OPS.get((t.functor, len(t.args)))
        if fn is None:
            return None
        vals = [_arith_value(a) for a in t.args]
        if any(v is None for v in vals):
            return None
        return fn(*vals)
    return None


class _Poisoned(Exception):
    pass


def _resolve(t: Term, env: Env) -> Term:
    """Apply bindings; raises _Poisoned when an uncertain variable is reached."""
    if isinstance(t, Var):
        seen = set()
        while isinstance(t, Var) and t in env:
            if t in seen:
                break
            seen.add(t)
            val = env[t]
            if val is _POISON:
                raise _Poisoned()
            t = val
        if isinstance(t, Var):
            return t
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_resolve(a, env) for a in t.args))
    return t


def _has_var(t: Term) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            return True
        if isinstance(x, Compound):
            stack.extend(x.args)
    return False


def _unify(a: Term, b: Term, env: Env) -> Optional[Env]:
    env = dict(env)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, env), _walk(y, env)
        if x is _POISON or y is _POISON:
            raise _Poisoned()
        if isinstance(x, Var):
            if x != y:
                env[x] = y
            continue
        if isinstance(y, Var):
            env[y] = x
            continue
        if isinstance(x, Compound) and isinstance(y, Compound):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
            continue
        if x != y:
            return None
    return env


def _walk(t, env: Env):
    while isinstance(t, Var) and t in env:
        t = env[t]
        if t is _POISON:
            return _POISON
    return t


def _poison(t: Term, env: Env) -> Env:
    env = dict(env)
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if x not in env:
                env[x] = _POISON
        elif isinstance(x, Compound):
            stack.extend(x.args)
    return env


class ConditionEvaluator:
    def __init__(self, dialect: DialectVersion, db: Catalog):
        self.dialect = dialect
        self.db = db
        self.profile = get_profile(dialect.dialect)

    # Each goal evaluator returns (value, env).  The env only matters when
    # the value is TRUE; for UNKNOWN the goal's variables are poisoned.

    def eval(self, goal: Term, env: Optional[Env] = None) -> CondValue:
        return self.solve(goal, env or {})[0]

    def solve(self, goal: Term, env: Env) -> Tuple[CondValue, Env]:
        try:
            value, new_env = self._solve(goal, env)
        except _Poisoned:
            return U, _poison(goal, env)
        if value is U:
            return U, _poison(goal, env)
        return value, new_env if value is T else env

    def _solve(self, goal: Term, env: Env) -> Tuple[CondValue, Env]:
        goal = _walk(goal, env)
        if goal is _POISON or isinstance(goal, Var):
            return U, env
        if isinstance(goal, Atom):
            if goal.name in ("true", "otherwise"):
                return T, env
            if goal.name in ("fail", "false"):
                return F, env
            return U, env
        if not isinstance(goal, Compound):
            return U, env
        name, args = goal.functor, goal.args
        n = len(args)
        if name == "," and n == 2:
            left, env1 = self.solve(args[0], env)
            if left is F:
                return F, env
            right, env2 = self.solve(args[1], env1)
            return left & right, env2
        if name == ";" and n == 2:
            cond = args[0]
            if isinstance(cond, Compound) and cond.functor == "->" and len(cond.args) == 2:
                return self.if_then_else(cond.args[0], cond.args[1], args[1], env)
            left, env_l = self.solve(args[0], env)
            right, env_r = self.solve(args[1], env)
            value = left | right
            if left is T and right is F:
                return T, env_l
            if left is F and right is T:
                return T, env_r
            # Bindings differ per alternative: keep only what is certain.
            return value, _poison(goal, env)
        if name == "->" and n == 2:
            return self.if_then_else(args[0], args[1], Atom("fail"), env)
        if name == "\\+" and n == 1:
            value, _ = self.solve(args[0], env)
            return ~value, env
        if name == "call" and n == 1:
            return self.solve(args[0], env)
        if name == "=" and n == 2:
            new_env = _unify(args[0], args[1], env)
            return (F, env) if new_env is None else (T, new_env)
        if name in _COMPARE and n == 2:
            a, b = _resolve(args[0], env), _resolve(args[1], env)
            if _has_var(a) or _has_var(b):
                return U, env
            return CondValue.of(_COMPARE[name](compare_terms(a, b))), env
        if name in _ARITH_COMPARE and n == 2:
            a, b = _arith_value(_resolve(args[0], env)), _arith_value(_resolve(args[1], env))
            if a is None or b is None:
                return U, env
            return CondValue.of(_ARITH_COMPARE[name](a, b)), env
        if name == "current_prolog_flag" and n == 2:
            return self.prolog_flag(args[0], args[1], env)
        if name == "predicate_property" and n == 2:
            return self.predicate_exists(args[0], env), env
        if name == "current_predicate" and n == 1:
            return self.current_predicate(args[0], env), env
        if name == "catch" and n == 3:
            return self.catch(args[0], args[2], env)
        if name == "current_arithmetic_function" and n == 1:
            return self.arith_probe(args[0], env), env
        if name == "exists_source" and n == 1:
            if self.native("exists_source", 1) is not T:
                return U, env
            return self.library_exists(args[0], env), env
        if name == "absolute_file_name" and n == 3:
            value = self.library_exists(args[0], env)
            if value is F and not self._fails_silently(args[2], env):
                return U, env
            return value, env
        return U, env

    def if_then_else(self, c: Term, t: Term, e: Term, env: Env) -> Tuple[CondValue, Env]:
        cv, env_c = self.solve(c, env)
        if cv is T:
            return self.solve(t, env_c)
        if cv is F:
            return self.solve(e, env)
        tv, _ = self.solve(t, env_c)
        ev, _ = self.solve(e, env)
        value = tv if tv is ev else U
        return value, _poison(Compound(",", (c, Compound(",", (t, e)))), env)

    def prolog_flag(self, flag: Term, value: Term, env: Env) -> Tuple[CondValue, Env]:
        flag = _resolve(flag, env)
        if not isinstance(flag, Atom):
            return U, env
        actual: Optional[Term] = None
        if flag.name == "dialect":
            actual = Atom(self.dialect.flag)
        elif flag.name == "version_data":
            actual = self.dialect.version_data
        elif flag.name == "double_quotes":
            actual = Atom(self.profile.double_quotes_default)
        elif flag.name == "bounded":
            actual = Atom("false") if self.dialect.dialect == "swi8" else Atom("true")
        if actual is None:
            return U, env
        new_env = _unify(value, actual, env)
        return (F, env) if new_env is None else (T, new_env)

    def native(self, name: str, arity: int, module: Optional[str] = None) -> CondValue:
        r = self.db.lookup_predicate(name, arity, module)
        if r is None:
            return U
        state = r.state(self.dialect.dialect)
        return CondValue.of(state in ("supported", "behavior_differs"))

    def predicate_exists(self, head: Term, env: Env) -> CondValue:
        head = _resolve(head, env)
        module = None
        if isinstance(head, Compound) and head.functor == ":" and len(head.args) == 2:
            if not isinstance(head.args[0], Atom):
                return U
            module, head = head.args[0].name, head.args[1]
        if isinstance(head, Atom):
            return self.native(head.name, 0, module)
        if isinstance(head, Compound):
            return self.native(head.functor, len(head.args), module)
        return U

    def current_predicate(self, spec: Term, env: Env) -> CondValue:
        spec = _resolve(spec, env)
        if not (isinstance(spec, Compound) and spec.functor == "/" and len(spec.args) == 2):
            return U
        name, arity = spec.args
        if not (isinstance(name, Atom) and isinstance(arity, Int)):
            return U
        r = self.db.lookup_predicate(name.name, arity.value, None)
        if r is None:
            return U
        # ISO current_predicate/1 does not see built-ins.
        if r.state(self.dialect.dialect) == "absent":
            return F
        cp = self.db.lookup_predicate("current_predicate", 1)
        if cp is not None and cp.state(self.dialect.dialect) == "behavior_differs":
            return F
        return T

    def catch(self, goal: Term, recovery: Term, env: Env) -> Tuple[CondValue, Env]:
        goal = _walk(goal, env)
        recovery_fails = isinstance(recovery, Atom) and recovery.name in ("fail", "false")
        if isinstance(goal, Compound) and goal.functor == "is" and len(goal.args) == 2:
            try:
                value = self.evaluable(_resolve(goal.args[1], env))
            except _Poisoned:
                return U, env
            if value is F and not recovery_fails:
                return U, env
            return value, env
        value, env2 = self.solve(goal, env)
        if value is T or recovery_fails:
            return value, env2
        return U, env

    def evaluable(self, expr: Term) -> CondValue:
        """Would ``_ is Expr`` evaluate without an existence error?"""
        result = T
        stack = [expr]
        while stack:
            e = stack.pop()
            if isinstance(e, (Int, Float)):
                continue
            if isinstance(e, Var):
                return U
            if isinstance(e, Atom):
                name, arity, args = e.name, 0, ()
            elif isinstance(e, Compound):
                if e.functor in LIST_FUNCTORS and len(e.args) == 2 and e.args[1] == Atom(NIL):
                    stack.append(e.args[0])
                    continue
                name, arity, args = e.functor, len(e.args), e.args
            else:
                return U
            state = self.db.lookup_arith_function(name, arity, self.dialect.dialect)
            if state is None:
                result = result & U
            elif state == "absent":
                return F
            stack.extend(args)
        return result

    def arith_probe(self, spec: Term, env: Env) -> CondValue:
        if self.native("current_arithmetic_function", 1) is not T:
            return U
        spec = _resolve(spec, env)
        if isinstance(spec, Atom):
            name, arity = spec.name, 0
        elif isinstance(spec, Compound):
            name, arity = spec.functor, len(spec.args)
        else:
            return U
        state = self.db.lookup_arith_function(name, arity, self.dialect.dialect)
        if state is None:
            return U
        return CondValue.of(state == "supported")

    def library_exists(self, spec: Term, env: Env) -> CondValue:
        lib = library_name(_resolve(spec, env))
        if lib is None:
            return U
        r = self.db.lookup_library(lib)
        if r is None:
            return U
        return CondValue.of(r.state(self.dialect.dialect) != "absent")

    def _fails_silently(self, options: Term, env: Env) -> bool:
        options = _resolve(options, env)
        view = list_view(options, self.profile.list_functor) or list_view(options, ".")
        if view is None:
            return False
        return any(
            isinstance(o, Compound) and o.functor == "file_errors" and o.args == (Atom("fail"),)
            for o in view[0]
        )


def eval_condition(goal: Term, dialect, db: Catalog) -> CondValue:
    if isinstance(dialect, str):
        dialect = DialectVersion.parse(dialect)
    return ConditionEvaluator(dialect, db).eval(goal)


class Activity(enum.Enum):
    YES = "yes"
    NO = "no"
    MAYBE = "maybe"

    def __and__(self, other: "Activity") -> "Activity":
        if self is Activity.NO or other is Activity.NO:
            return Activity.NO
        if self is Activity.MAYBE or other is Activity.MAYBE:
            return Activity.MAYBE
        return Activity.YES


def select_branches(block: CondBlock, dialect, db: Catalog) -> List[Tuple[object, Activity]]:
    """Activity of every branch of ``block`` for one dialect.

    A branch runs when its condition holds and every earlier condition
    failed.  With unknown conditions this is decided exactly: ``no`` once an
    earlier condition is certainly true or the branch's own condition is
    certainly false, ``yes`` when everything is known, ``maybe`` otherwise.
    Separate occurrences of an unknown goal are treated as independent.
    """
    if isinstance(dialect, str):
        dialect = DialectVersion.parse(dialect)
    ev = ConditionEvaluator(dialect, db)
    out = []
    earlier = F  # disjunction of all earlier conditions
    for branch in block.branches:
        value = T if branch.condition is None else ev.eval(branch.condition)
        runs = ~earlier & value
        activity = {T: Activity.YES, F: Activity.NO, U: Activity.MAYBE}[runs]
        out.append((branch, activity))
        earlier = earlier | value
    return out
