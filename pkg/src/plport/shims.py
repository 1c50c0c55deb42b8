"""Compatibility shim modules the rewriter can emit.

Each shim is a self-contained module defining predicates one dialect lacks
in terms of primitives it has.  The catalog refers to shims by id; the
closed-world check in :mod:`plport.dialect_db` makes sure every id it
mentions exists here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

from plport.errors import UnknownShim


@dataclass(frozen=True)
class Shim:
    id: str
    provides: Tuple[Tuple[str, int], ...]
    body: str

    def module_text(self) -> str:
        exports = ", ".join(f"{n}/{a}" for n, a in self.provides)
        header = f"% Generated compatibility shim: {self.id}\n:- module({self.id}, [{exports}]).\n\n"
        return header + self.body

    @property
    def probe(self) -> Tuple[str, int]:
        """Predicate whose absence means the shim has to be loaded."""
        return self.provides[0]


_EXISTS_SOURCE = """\
exists_source(Source) :-
    absolute_file_name(Source, _, [access(exist), file_type(source), file_errors(fail)]).
"""

_MUTABLE = """\
% A mutable is a one-argument wrapper whose argument is updated in place
% (backtrackable, like the native mutable type).
create_mutable(Value, '$mutable'(Value)).

get_mutable(Value, '$mutable'(Current)) :-
    Value = Current.

update_mutable(Value, Mutable) :-
    Mutable = '$mutable'(_),
    setarg(1, Mutable, Value).

mutable(Term) :-
    nonvar(Term),
    Term = '$mutable'(_).
"""

_RANDOM_SEED = """\
:- if(predicate_property(set_random(_), _)).
  set_new_random_seed :- set_random(seed(random)).
:- else.
  :- use_module(library(random), [setrand/1]).
  :- use_module(library(system), [now/1]).
  set_new_random_seed :- now(TimeStamp), setrand(TimeStamp).
:- endif.
"""

SHIMS: Dict[str, Shim] = {
    "exists_source_via_afn": Shim("exists_source_via_afn", (("exists_source", 1),), _EXISTS_SOURCE),
    "mutable_terms": Shim(
        "mutable_terms",
        (("create_mutable", 2), ("get_mutable", 2), ("update_mutable", 2), ("mutable", 1)),
        _MUTABLE,
    ),
    "random_seed": Shim("random_seed", (("set_new_random_seed", 0),), _RANDOM_SEED),
}


def get_shim(shim_id: str) -> Shim:
    try:
        return SHIMS[shim_id]
    except KeyError:
        raise UnknownShim(f"unknown shim {shim_id!r}") from None


def shim_for_module(module_path: str):
    """Map a ``use_module`` path such as ``'shims/mutable_terms'`` to a shim."""
    base = module_path.rsplit("/", 1)[-1]
    if base.endswith(".pl"):
        base = base[:-3]
    return SHIMS.get(base)
