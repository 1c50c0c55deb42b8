"""Dialect profiles: operator tables and the syntax knobs the reader honours.

The per-dialect operator extras live in ``data/operators.json`` so they can
be edited without touching code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

PREFIX_TYPES = ("fy", "fx")
INFIX_TYPES = ("xfx", "xfy", "yfx")
POSTFIX_TYPES = ("xf", "yf")
OP_TYPES = PREFIX_TYPES + INFIX_TYPES + POSTFIX_TYPES

DIALECTS = ("sicstus4", "swi8")
PROFILE_IDS = DIALECTS + ("iso",)

# Lexical features a reader may or may not accept.  The tokenizer records
# every use so the analyzer can flag code another dialect cannot read.
SYNTAX_FEATURES = (
    "unicode_unquoted",
    "nonascii_layout_in_quotes",
    "digit_groups",
)

_ALIASES = {
    "sicstus": "sicstus4",
    "sicstus4": "sicstus4",
    "swi": "swi8",
    "swipl": "swi8",
    "swi8": "swi8",
    "iso": "iso",
}


def canonical_dialect(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown dialect {name!r}") from None


def op_class(op_type: str) -> str:
    if op_type in PREFIX_TYPES:
        return "prefix"
    if op_type in INFIX_TYPES:
        return "infix"
    if op_type in POSTFIX_TYPES:
        return "postfix"
    raise ValueError(f"bad operator type {op_type!r}")


@dataclass(frozen=True)
class OperatorDef:
    """One operator definition.

    ``origin`` says where the definition comes from: ``"builtin"``, a library
    (``"library:clpfd"``) or a source file (``"file:<path>"``).  ``exported``
    is set for file definitions that are visible outside their module.
    """

    name: str
    priority: int
    type: str
    origin: str = "builtin"
    exported: bool = False

    def __post_init__(self) -> None:
        if self.type not in OP_TYPES:
            raise ValueError(f"bad operator type {self.type!r}")
        if not 0 <= self.priority <= 1200:
            raise ValueError(f"operator priority out of range: {self.priority}")

    @property
    def kind(self) -> str:
        return op_class(self.type)


class OperatorTable:
    """Mutable operator table keyed by (name, prefix|infix|postfix)."""

    def __init__(self, defs: Iterable[OperatorDef] = ()):
        self._ops: Dict[Tuple[str, str], OperatorDef] = {}
        for d in defs:
            self.add(d)

    def copy(self) -> "OperatorTable":
        t = OperatorTable()
        t._ops = dict(self._ops)
        return t

    def add(self, d: OperatorDef) -> None:
        kind = d.kind
        # An atom cannot be both infix and postfix.
        clash = {"infix": "postfix", "postfix": "infix"}.get(kind)
        if d.priority == 0:
            self._ops.pop((d.name, kind), None)
            return
        if clash:
            self._ops.pop((d.name, clash), None)
        self._ops[(d.name, kind)] = d

    def get(self, name: str, kind: str) -> Optional[OperatorDef]:
        return self._ops.get((name, kind))

    def prefix(self, name: str) -> Optional[OperatorDef]:
        return self._ops.get((name, "prefix"))

    def infix(self, name: str) -> Optional[OperatorDef]:
        return self._ops.get((name, "infix"))

    def postfix(self, name: str) -> Optional[OperatorDef]:
        return self._ops.get((name, "postfix"))

    def is_op(self, name: str) -> bool:
        return any((name, k) in self._ops for k in ("prefix", "infix", "postfix"))

    def __iter__(self):
        return iter(self._ops.values())

    def __len__(self) -> int:
        return len(self._ops)


@dataclass(frozen=True)
class DialectProfile:
    id: str
    double_quotes_default: str
    list_functor: str
    operator_scope: str
    nonascii_unquoted_policy: str
    initial_operators: Tuple[OperatorDef, ...]
    syntax_features: FrozenSet[str] = frozenset()
    library_operators: Dict[str, Tuple[OperatorDef, ...]] = field(default_factory=dict, compare=False)
    dialect_flag: str = ""
    version_data: Tuple = ()

    def accepts(self, feature: str) -> bool:
        if feature == "unicode_unquoted":
            return self.nonascii_unquoted_policy == "full_unicode"
        return feature in self.syntax_features

    def operator_table(self) -> OperatorTable:
        return OperatorTable(self.initial_operators)

    def with_operators(self, extra: Iterable[OperatorDef]) -> "DialectProfile":
        return replace(self, initial_operators=self.initial_operators + tuple(extra))


def _load_operator_data() -> dict:
    text = resources.files("plport").joinpath("data/operators.json").read_text("utf-8")
    return json.loads(text)


def _defs(rows: List[list], origin: str = "builtin") -> Tuple[OperatorDef, ...]:
    out = []
    for priority, op_type, names in rows:
        for name in names:
            out.append(OperatorDef(name, priority, op_type, origin))
    return tuple(out)


def _build_profiles() -> Dict[str, DialectProfile]:
    data = _load_operator_data()
    iso = _defs(data["iso"])
    libs = {
        lib: _defs(rows, f"library:{lib}") for lib, rows in data["libraries"].items()
    }
    profiles = {}
    for pid, spec in data["profiles"].items():
        ops = iso + _defs(spec.get("operators", []))
        for lib in spec.get("preloaded_libraries", []):
            ops += libs[lib]
        profiles[pid] = DialectProfile(
            id=pid,
            double_quotes_default=spec["double_quotes"],
            list_functor=spec["list_functor"],
            operator_scope=spec["operator_scope"],
            nonascii_unquoted_policy=spec["nonascii_unquoted_policy"],
            initial_operators=ops,
            syntax_features=frozenset(spec.get("syntax_features", [])),
            library_operators=libs,
            dialect_flag=spec.get("dialect_flag", pid),
            version_data=tuple(spec.get("version_data", [])),
        )
    return profiles


_PROFILES: Optional[Dict[str, DialectProfile]] = None


def get_profile(name: str) -> DialectProfile:
    global _PROFILES
    if _PROFILES is None:
        _PROFILES = _build_profiles()
    return _PROFILES[canonical_dialect(name)]


SICSTUS4 = "sicstus4"
SWI8 = "swi8"
