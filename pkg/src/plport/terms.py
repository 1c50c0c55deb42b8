"""Dialect-neutral Prolog term model.

Terms are immutable values.  Lists are ordinary binary compounds whose
functor depends on the dialect (``'.'`` traditionally, ``'[|]'`` on modern
SWI-Prolog), so anything that needs a list interpretation goes through
:func:`list_view` with an explicit list functor.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

NIL = "[]"
LIST_FUNCTORS = (".", "[|]")


@dataclass(frozen=True)
class Var:
    name: str
    id: int

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.id})"


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self) -> str:
        return f"Int({self.value})"


@dataclass(frozen=True, eq=False)
class Float:
    """64-bit float compared by bit pattern.

    This makes NaN equal to itself and keeps 0.0 and -0.0 apart, which is
    what hashing needs from an equivalence relation.
    """

    value: float

    def bits(self) -> int:
        return struct.unpack(">Q", struct.pack(">d", self.value))[0]

    def __eq__(self, other: object) -> bool:
        if other.__class__ is not Float:
            return NotImplemented
        return self.bits() == other.bits()

    def __hash__(self) -> int:
        return hash(("Float", self.bits()))

    def __repr__(self) -> str:
        return f"Float({self.value!r})"


@dataclass(frozen=True)
class Str:
    value: str

    def __repr__(self) -> str:
        return f"Str({self.value!r})"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("compound terms need at least one argument; use Atom")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def indicator(self) -> Tuple[str, int]:
        return (self.functor, len(self.args))

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {list(self.args)!r})"


Term = Union[Var, Atom, Int, Float, Str, Compound]


@dataclass(frozen=True, order=True)
class SourceSpan:
    """A region of a source file; lines and columns are 1-based.

    ``end_col`` points one past the last character, so an empty span has
    ``start == end``.
    """

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")

    @property
    def start(self) -> Tuple[int, int]:
        return (self.start_line, self.start_col)

    @property
    def end(self) -> Tuple[int, int]:
        return (self.end_line, self.end_col)

    def covers(self, other: "SourceSpan") -> bool:
        return self.start <= other.start and other.end <= self.end

    def join(self, other: "SourceSpan") -> "SourceSpan":
        lo = min(self.start, other.start)
        hi = max(self.end, other.end)
        return SourceSpan(self.file, lo[0], lo[1], hi[0], hi[1])

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


def atom(name: str) -> Atom:
    return Atom(name)


def compound(functor: str, *args: Term) -> Term:
    if not args:
        return Atom(functor)
    return Compound(functor, tuple(args))


def make_list(items: Sequence[Term], tail: Term = Atom(NIL), functor: str = ".") -> Term:
    result = tail
    for item in reversed(items):
        result = Compound(functor, (item, result))
    return result


def is_cons(t: Term, list_functor: str) -> bool:
    return isinstance(t, Compound) and t.functor == list_functor and len(t.args) == 2


def _list_functor_of(profile) -> str:
    if isinstance(profile, str):
        return profile
    return profile.list_functor


def list_view(t: Term, profile) -> Optional[Tuple[list, Term]]:
    """Split a cons chain into its elements and tail.

    ``profile`` is a dialect profile (anything with ``list_functor``) or the
    functor name itself.  Returns ``None`` when ``t`` is not a cons cell of
    that functor.
    """
    functor = _list_functor_of(profile)
    if not is_cons(t, functor):
        return None
    items = []
    while is_cons(t, functor):
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order, left-to-right traversal without recursion."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Compound):
            stack.extend(reversed(node.args))


def term_variables(t: Term) -> list:
    seen = {}
    for node in iter_subterms(t):
        if isinstance(node, Var) and node not in seen:
            seen[node] = None
    return list(seen)


def is_ground(t: Term) -> bool:
    return not any(isinstance(node, Var) for node in iter_subterms(t))


def canonical_var(index: int) -> Var:
    return Var(f"_G{index}", index)


def map_vars(t: Term, fn) -> Term:
    """Rebuild ``t`` with every variable replaced by ``fn(var)``."""
    # Iterative post-order rebuild: deep lists must not hit the recursion limit.
    stack = [(t, False)]
    out: list = []
    while stack:
        node, built = stack.pop()
        if isinstance(node, Compound):
            if built:
                n = len(node.args)
                args = tuple(out[-n:])
                del out[-n:]
                if all(a is b for a, b in zip(args, node.args)):
                    out.append(node)
                else:
                    out.append(Compound(node.functor, args))
            else:
                stack.append((node, True))
                for arg in reversed(node.args):
                    stack.append((arg, False))
        elif isinstance(node, Var):
            out.append(fn(node))
        else:
            out.append(node)
    return out[0]


def alpha_number(t: Term) -> Term:
    """Replace variables by canonical ones numbered by first occurrence."""
    numbering: dict = {}

    def rename(v: Var) -> Var:
        if v not in numbering:
            numbering[v] = canonical_var(len(numbering))
        return numbering[v]

    return map_vars(t, rename)


def identical(t1: Term, t2: Term) -> bool:
    """Tree identity, iterative so long lists stay cheap."""
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        if a is b:
            continue
        if isinstance(a, Compound):
            if not (isinstance(b, Compound) and a.functor == b.functor
                    and len(a.args) == len(b.args)):
                return False
            stack.extend(zip(a.args, b.args))
        elif a != b:
            return False
    return True


def structural_eq(t1: Term, t2: Term) -> bool:
    """Alpha-equivalence: equal up to consistent variable renaming."""
    return identical(alpha_number(t1), alpha_number(t2))


# Standard order of terms: Var < Number < Atom < String < Compound.
_ORDER_RANK = {Var: 0, Float: 1, Int: 1, Atom: 3, Str: 4, Compound: 5}


def _num_cmp(a: Term, b: Term) -> int:
    x, y = a.value, b.value
    if isinstance(x, float) and math.isnan(x):
        return 0 if isinstance(y, float) and math.isnan(y) else -1
    if isinstance(y, float) and math.isnan(y):
        return 1
    if x < y:
        return -1
    if x > y:
        return 1
    # Equal by value: Float sorts before Int.
    if isinstance(a, Float) and isinstance(b, Int):
        return -1
    if isinstance(a, Int) and isinstance(b, Float):
        return 1
    return 0


def compare_terms(a: Term, b: Term) -> int:
    """Three-way comparison in the standard order of terms."""
    ra, rb = _ORDER_RANK[type(a)], _ORDER_RANK[type(b)]
    if ra != rb:
        return -1 if ra < rb else 1
    if isinstance(a, Var):
        ka, kb = (a.id, a.name), (b.id, b.name)
        return (ka > kb) - (ka < kb)
    if isinstance(a, (Int, Float)):
        return _num_cmp(a, b)
    if isinstance(a, (Atom, Str)):
        x = a.name if isinstance(a, Atom) else a.value
        y = b.name if isinstance(b, Atom) else b.value
        return (x > y) - (x < y)
    if a.arity != b.arity:
        return -1 if a.arity < b.arity else 1
    if a.functor != b.functor:
        return -1 if a.functor < b.functor else 1
    for x, y in zip(a.args, b.args):
        c = compare_terms(x, y)
        if c:
            return c
    return 0


def indicator_text(name: str, arity: int, module: Optional[str] = None) -> str:
    base = f"{name}/{arity}"
    return f"{module}:{base}" if module else base
