"""The portability catalog: per-dialect status of predicates, libraries,
flags and arithmetic functions.

The built-in records live in ``data/seed_catalog.json``; extension files in
the same format merge over them, later files winning by record id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import jsonschema

from plport.errors import DuplicateId, SchemaError
from plport.profiles import DIALECTS, canonical_dialect, get_profile
from plport.shims import SHIMS
from plport.terms import Atom, Compound, Int, Term, compare_terms

STATES = ("supported", "absent", "name_differs", "behavior_differs", "emulatable")
KINDS = ("predicate", "library", "flag", "arith_function", "syntax", "directive")

CATALOG_SCHEMA = {
    "type": "object",
    "properties": {
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "name", "status"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": list(KINDS)},
                    "name": {"type": "string"},
                    "arity": {"type": ["integer", "null"], "minimum": 0},
                    "module": {"type": ["string", "null"]},
                    "note": {"type": "string"},
                    "category": {"type": "string"},
                    "see_also": {"type": "string"},
                    "status": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["state"],
                            "properties": {
                                "state": {"enum": list(STATES)},
                                "replacement": {
                                    "type": "object",
                                    "required": ["name"],
                                    "properties": {
                                        "name": {"type": "string"},
                                        "arity": {"type": ["integer", "null"]},
                                        "module": {"type": ["string", "null"]},
                                    },
                                },
                                "permutation": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                                "shim": {"type": "string"},
                                "note": {"type": "string"},
                            },
                        },
                    },
                },
            },
        }
    },
    "additionalProperties": True,
}


@dataclass(frozen=True)
class Replacement:
    name: str
    arity: Optional[int] = None
    module: Optional[str] = None


@dataclass(frozen=True)
class Status:
    state: str
    replacement: Optional[Replacement] = None
    permutation: Optional[Tuple[int, ...]] = None
    shim: Optional[str] = None
    note: str = ""

    def to_json(self) -> dict:
        out: dict = {"state": self.state}
        if self.replacement is not None:
            out["replacement"] = {
                "name": self.replacement.name,
                "arity": self.replacement.arity,
                "module": self.replacement.module,
            }
        if self.permutation is not None:
            out["permutation"] = list(self.permutation)
        if self.shim is not None:
            out["shim"] = self.shim
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    kind: str
    name: str
    arity: Optional[int]
    module: Optional[str]
    status: Dict[str, Status] = field(compare=False)
    note: str = ""
    category: str = ""
    see_also: str = ""

    def state(self, dialect: str) -> str:
        return self.status[dialect].state

    @property
    def indicator(self) -> str:
        base = self.name if self.arity is None else f"{self.name}/{self.arity}"
        return f"{self.module}:{base}" if self.module else base


@dataclass(frozen=True)
class DialectVersion:
    """A dialect plus the version term its ``version_data`` flag reports."""

    dialect: str
    version_data: Term

    @classmethod
    def default(cls, dialect: str) -> "DialectVersion":
        profile = get_profile(dialect)
        return cls(profile.id, _version_term(profile.dialect_flag, profile.version_data))

    @classmethod
    def parse(cls, text: str) -> "DialectVersion":
        """``swi8`` or ``swi8@9.1.2``."""
        name, _, version = text.partition("@")
        base = cls.default(name)
        if not version:
            return base
        parts = [int(p) for p in version.split(".")]
        profile = get_profile(base.dialect)
        defaults = list(profile.version_data)
        nums = parts + [0] * max(0, 3 - len(parts))
        data = nums[:3] + defaults[3:]
        return cls(base.dialect, _version_term(profile.dialect_flag, data))

    @property
    def flag(self) -> str:
        return get_profile(self.dialect).dialect_flag

    def components(self) -> Tuple[int, ...]:
        if isinstance(self.version_data, Compound):
            return tuple(a.value for a in self.version_data.args if isinstance(a, Int))
        return ()

    def __lt__(self, other: "DialectVersion") -> bool:
        return compare_terms(self.version_data, other.version_data) < 0


def _version_term(flag: str, data: Iterable) -> Term:
    args = []
    for x in data:
        if isinstance(x, int):
            args.append(Int(x))
        elif isinstance(x, list):
            args.append(Atom("[]") if not x else Atom(str(x)))
        else:
            args.append(Atom(str(x)))
    return Compound(flag, tuple(args))


def _status_from_json(d: dict) -> Status:
    rep = d.get("replacement")
    perm = d.get("permutation")
    return Status(
        state=d["state"],
        replacement=Replacement(rep["name"], rep.get("arity"), rep.get("module")) if rep else None,
        permutation=tuple(perm) if perm else None,
        shim=d.get("shim"),
        note=d.get("note", ""),
    )


def parse_catalog_document(doc: object, path: str, dialects: Tuple[str, ...] = DIALECTS) -> List[FeatureRecord]:
    """Validate a catalog document and turn it into records."""
    try:
        jsonschema.validate(doc, CATALOG_SCHEMA)
    except jsonschema.ValidationError as exc:
        location = "/" + "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(path, location, exc.message) from None
    records = []
    seen = set()
    for i, raw in enumerate(doc.get("records", [])):
        where = f"/records/{i}"
        if raw["id"] in seen:
            raise DuplicateId(path, where, f"duplicate record id {raw['id']!r}")
        seen.add(raw["id"])
        status = {}
        for dialect, sd in raw["status"].items():
            if dialect not in dialects:
                raise SchemaError(path, f"{where}/status/{dialect}", f"unknown dialect {dialect!r}")
            st = _status_from_json(sd)
            if st.state == "name_differs" and st.replacement is None:
                raise SchemaError(path, f"{where}/status/{dialect}", "name_differs needs a replacement")
            if st.state == "emulatable" and not st.shim:
                raise SchemaError(path, f"{where}/status/{dialect}", "emulatable needs a shim id")
            status[dialect] = st
        missing = [d for d in dialects if d not in status]
        if missing:
            raise SchemaError(path, f"{where}/status", f"missing status for {', '.join(missing)}")
        records.append(
            FeatureRecord(
                id=raw["id"],
                kind=raw["kind"],
                name=raw["name"],
                arity=raw.get("arity"),
                module=raw.get("module"),
                status=status,
                note=raw.get("note", ""),
                category=raw.get("category", ""),
                see_also=raw.get("see_also", ""),
            )
        )
    return records


class Catalog:
    """Immutable after construction; ``load_extension`` returns a new one."""

    def __init__(self, records: Iterable[FeatureRecord] = ()):
        self.records: Dict[str, FeatureRecord] = {}
        for r in records:
            self.records[r.id] = r
        self._index()

    def _index(self) -> None:
        self._by_key: Dict[tuple, FeatureRecord] = {}
        self._by_module: Dict[str, List[FeatureRecord]] = {}
        for r in self.records.values():
            self._by_key[(r.kind, r.name, r.arity, r.module)] = r
            if r.kind == "predicate" and r.module:
                self._by_module.setdefault(r.module, []).append(r)

    def __len__(self) -> int:
        return len(self.records)

    def lookup_predicate(self, name: str, arity: int, module: Optional[str] = None) -> Optional[FeatureRecord]:
        if arity < 0:
            raise ValueError("arity must be >= 0")
        if module is not None:
            r = self._by_key.get(("predicate", name, arity, module))
            if r is not None:
                return r
        return self._by_key.get(("predicate", name, arity, None))

    def lookup_arith_function(self, name: str, arity: int, dialect: str) -> Optional[str]:
        """``supported`` / ``absent``, or None when the catalog does not know."""
        r = self._by_key.get(("arith_function", name, arity, None))
        if r is None:
            return None
        return "supported" if r.state(canonical_dialect(dialect)) == "supported" else "absent"

    def lookup_library(self, name: str) -> Optional[FeatureRecord]:
        return self._by_key.get(("library", name, None, None))

    def lookup_flag(self, name: str) -> Optional[FeatureRecord]:
        return self._by_key.get(("flag", name, None, None))

    def lookup_directive(self, name: str) -> Optional[FeatureRecord]:
        return self._by_key.get(("directive", name, None, None))

    def library_predicates(self, module: str) -> List[FeatureRecord]:
        return list(self._by_module.get(module, ()))

    def builtin_records(self) -> List[FeatureRecord]:
        return [r for r in self.records.values() if r.kind == "predicate" and r.module is None]

    def merge(self, records: Iterable[FeatureRecord]) -> "Catalog":
        merged = dict(self.records)
        for r in records:
            merged[r.id] = r
        return Catalog(merged.values())

    def load_extension(self, path) -> "Catalog":
        path = str(path)
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(path, f"line {exc.lineno}", exc.msg) from None
        out = self.merge(parse_catalog_document(doc, path))
        out.check_shims()
        return out

    def check_shims(self) -> None:
        """Every emulatable status must name a shim the rewriter can emit."""
        for r in self.records.values():
            for dialect, st in r.status.items():
                if st.state == "emulatable" and st.shim not in SHIMS:
                    raise SchemaError(r.id, f"status/{dialect}", f"unknown shim {st.shim!r}")

    def to_document(self) -> dict:
        out = []
        for r in sorted(self.records.values(), key=lambda r: r.id):
            d = {
                "id": r.id,
                "kind": r.kind,
                "name": r.name,
                "arity": r.arity,
                "module": r.module,
                "status": {k: v.to_json() for k, v in sorted(r.status.items())},
                "note": r.note,
            }
            if r.category:
                d["category"] = r.category
            if r.see_also:
                d["see_also"] = r.see_also
            out.append(d)
        return {"records": out}


_SEED: Optional[Catalog] = None


def seed_catalog() -> Catalog:
    global _SEED
    if _SEED is None:
        text = resources.files("plport").joinpath("data/seed_catalog.json").read_text("utf-8")
        cat = Catalog(parse_catalog_document(json.loads(text), "<seed>"))
        cat.check_shims()
        _SEED = cat
    return _SEED


def load_catalog(extensions: Iterable = ()) -> Catalog:
    cat = seed_catalog()
    for path in extensions:
        cat = cat.load_extension(path)
    return cat
