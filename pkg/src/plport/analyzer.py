"""Portability lint: walks a SourceModel against the catalog and a set of
target dialects and reports rule findings P001..P012.

Code inside conditional-compilation branches is analyzed per target, using
the branch activity computed by :func:`plport.conditions.select_branches`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from plport.conditions import Activity, select_branches
from plport.dialect_db import Catalog, DialectVersion, FeatureRecord
from plport.errors import MalformedBlockSpec, NoConditionAvailable
from plport.goals import goal_indicator, iter_goals
from plport.lexer import LineIndex
from plport.profiles import canonical_dialect, get_profile
from plport.reader import Clause, CondBlock, Directive, SourceModel, library_name
from plport.rewriter import (
    FixPlan,
    block_fix,
    conditionalize,
    apply_fixes,
    inline_shim_plan,
    renamed_call_text,
    select_plans,
    set_flag_plan,
    shim_plan,
    splice_region,
    _plan,
)
from plport.shims import shim_for_module
from plport.terms import Atom, Compound, SourceSpan, Term, list_view

RULES = {
    "P001": "absent predicate",
    "P002": "predicate name differs",
    "P003": "predicate behavior differs",
    "P004": "library unavailable",
    "P005": "dialect-only syntax",
    "P006": "operator not imported",
    "P007": "double_quotes default dependence",
    "P008": "list functor name used directly",
    "P009": "mutable term API",
    "P010": "attributed variable API",
    "P011": "block declaration",
    "P012": "non-portable term hash",
}

_SEVERITY = {"P005": "error", "P006": "error", "P012": "notice"}
SEVERITY_ORDER = {"notice": 0, "warning": 1, "error": 2}

# Predicates through which a hash value leaves the process.
PERSISTENCE = frozenset(
    [
        ("write", 1), ("write", 2), ("writeq", 1), ("writeq", 2), ("print", 1), ("print", 2),
        ("write_canonical", 1), ("write_canonical", 2), ("write_term", 2), ("write_term", 3),
        ("format", 2), ("format", 3), ("portray_clause", 1), ("portray_clause", 2),
        ("open", 3), ("open", 4), ("tell", 1), ("append", 1), ("fast_write", 2),
        ("recorda", 3), ("recordz", 3), ("save_program", 1), ("put_byte", 2), ("write_bytes", 2),
    ]
)

_SYNTAX_MESSAGES = {
    "unicode_unquoted": "unquoted atom or variable uses characters outside ISO 8859-1",
    "nonascii_layout_in_quotes": "quoted text contains raw non-ASCII whitespace; it must be escaped",
    "digit_groups": "number uses digit group separators",
}


@dataclass
class Diagnostic:
    rule: str
    span: SourceSpan
    severity: str
    message: str
    dialects: Tuple[str, ...]
    fix: Optional[FixPlan] = None

    def __post_init__(self) -> None:
        if self.severity not in SEVERITY_ORDER:
            raise ValueError(f"bad severity {self.severity!r}")
        if not self.message:
            raise ValueError("empty diagnostic message")
        if not self.dialects:
            raise ValueError("diagnostic without dialects")

    @property
    def fix_available(self) -> bool:
        return self.fix is not None

    def sort_key(self) -> tuple:
        return (self.span.file, self.span.start_line, self.span.start_col, self.rule)

    def to_report(self) -> "ReportEntry":
        return ReportEntry(
            file=self.span.file,
            line=self.span.start_line,
            col=self.span.start_col,
            rule=self.rule,
            severity=self.severity,
            message=self.message,
            dialects=tuple(self.dialects),
            fix_available=self.fix_available,
        )

    def to_json(self) -> dict:
        return self.to_report().to_json()

    def text_line(self) -> str:
        return self.to_report().text_line()


@dataclass(frozen=True)
class ReportEntry:
    """The serialized form of a diagnostic (what JSON reports contain)."""

    file: str
    line: int
    col: int
    rule: str
    severity: str
    message: str
    dialects: Tuple[str, ...]
    fix_available: bool

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "rule": self.rule,
            "severity": self.severity,
            "message": self.message,
            "dialects": list(self.dialects),
            "fix_available": self.fix_available,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ReportEntry":
        return cls(
            file=d["file"],
            line=int(d["line"]),
            col=int(d["col"]),
            rule=d["rule"],
            severity=d["severity"],
            message=d["message"],
            dialects=tuple(d["dialects"]),
            fix_available=bool(d["fix_available"]),
        )

    def text_line(self) -> str:
        return (
            f"{self.file}:{self.line}:{self.col}: [{self.rule}] {self.severity}: "
            f"{self.message} ({', '.join(self.dialects)})"
        )


def emit_json(diagnostics: Iterable[Diagnostic]) -> str:
    return json.dumps([d.to_json() for d in diagnostics], indent=2, ensure_ascii=False)


def parse_json_report(text: str) -> List[ReportEntry]:
    return [ReportEntry.from_json(d) for d in json.loads(text)]


@dataclass
class _Finding:
    rule: str
    span: SourceSpan
    message: str
    dialects: Set[str] = field(default_factory=set)
    certain: bool = False  # reached through at least one "yes" path
    fix: Optional[FixPlan] = None


@dataclass
class _Imports:
    # library -> None (everything) or set of (name, arity)
    libraries: Dict[str, Optional[Set[Tuple[str, int]]]] = field(default_factory=dict)
    shimmed: Set[Tuple[str, int]] = field(default_factory=set)


def _normalize_targets(targets) -> List[DialectVersion]:
    out = {}
    for t in targets:
        dv = DialectVersion.parse(t) if isinstance(t, str) else t
        out[dv.dialect] = dv
    if not out:
        raise ValueError("no target dialects")
    return [out[k] for k in sorted(out)]


def _indicator_list(t: Term, list_functor: str) -> Optional[Set[Tuple[str, int]]]:
    view = list_view(t, list_functor) or list_view(t, ".") or list_view(t, "[|]")
    items = view[0] if view else ([] if t == Atom("[]") else None)
    if items is None:
        return None
    out = set()
    for it in items:
        if isinstance(it, Compound) and it.functor in ("/", "//") and len(it.args) == 2:
            n, a = it.args
            if isinstance(n, Atom) and hasattr(a, "value"):
                out.add((n.name, a.value + (2 if it.functor == "//" else 0)))
    return out


class Analyzer:
    def __init__(
        self,
        model: SourceModel,
        targets,
        db: Catalog,
        source_dialect: Optional[str] = None,
        shim_dir: str = "shims",
        strategy: str = "conditional",
    ):
        if strategy not in ("conditional", "shim"):
            raise ValueError(f"bad fix strategy {strategy!r}")
        self.strategy = strategy
        self.model = model
        self.targets = _normalize_targets(targets)
        self.db = db
        self.source = canonical_dialect(source_dialect or model.profile_id)
        self.source_profile = get_profile(self.source)
        self.shim_dir = shim_dir
        self.index = LineIndex(model.text, model.file)
        self.findings: Dict[tuple, _Finding] = {}
        self.local_defs = self._local_definitions()
        self._fix_cache: Dict[object, Optional[FixPlan]] = {}
        self.dialect_ids = {dv.dialect for dv in self.targets} | {self.source}

    # -- setup -----------------------------------------------------------

    def _local_definitions(self) -> Set[Tuple[str, int]]:
        defs = set()
        for item in self.model.walk():
            if isinstance(item, Clause):
                head = item.head
                if isinstance(item.term, Compound) and item.term.functor == "-->" and len(item.term.args) == 2:
                    info = goal_indicator(head)
                    if info:
                        defs.add((info[1], info[2] + 2))
                    continue
                info = goal_indicator(head)
                if info:
                    defs.add((info[1], info[2]))
        return defs

    def active_items(self, dv: DialectVersion) -> List[Tuple[object, Activity]]:
        out = []
        stack = [(item, Activity.YES) for item in reversed(self.model.items)]
        while stack:
            item, act = stack.pop()
            if isinstance(item, CondBlock):
                branches = select_branches(item, dv, self.db)
                for branch, bact in reversed(branches):
                    sub = act & bact
                    if sub is Activity.NO:
                        continue
                    stack.extend((it, sub) for it in reversed(branch.items))
            else:
                out.append((item, act))
        return out

    def imports_for(self, items) -> _Imports:
        imp = _Imports()
        lf = self.source_profile.list_functor
        for item, _ in items:
            if not isinstance(item, Directive):
                continue
            goal = item.term
            if not isinstance(goal, Compound) or goal.functor not in ("use_module", "ensure_loaded"):
                continue
            spec = goal.args[0]
            lib = library_name(spec)
            if lib is not None:
                only = None
                if goal.functor == "use_module" and len(goal.args) == 2:
                    only = _indicator_list(goal.args[1], lf)
                prev = imp.libraries.get(lib, set())
                if only is None or prev is None:
                    imp.libraries[lib] = None
                else:
                    imp.libraries[lib] = prev | only
            elif isinstance(spec, Atom):
                shim = shim_for_module(spec.name)
                if shim is not None:
                    imp.shimmed.update(shim.provides)
        return imp

    # -- recording --------------------------------------------------------

    def add(self, rule: str, span: SourceSpan, message: str, dialect: str, act: Activity,
            fix: Optional[FixPlan] = None) -> None:
        key = (rule, span, message)
        f = self.findings.get(key)
        if f is None:
            f = self.findings[key] = _Finding(rule, span, message)
        f.dialects.add(dialect)
        f.certain = f.certain or act is Activity.YES
        if fix is not None and f.fix is None:
            f.fix = fix

    def fix_once(self, key, build) -> Optional[FixPlan]:
        if key not in self._fix_cache:
            try:
                self._fix_cache[key] = build()
            except (MalformedBlockSpec, NoConditionAvailable, ValueError):
                self._fix_cache[key] = None
        return self._fix_cache[key]

    # -- resolution -------------------------------------------------------

    def resolve(self, module: Optional[str], name: str, arity: int, imp: _Imports) -> Optional[FeatureRecord]:
        if module is not None:
            r = self.db.lookup_predicate(name, arity, module)
            return r
        if (name, arity) in self.local_defs:
            return None
        for lib, only in imp.libraries.items():
            r = self.db.lookup_predicate(name, arity, lib)
            if r is not None and r.module == lib and (only is None or (name, arity) in only):
                return r
        r = self.db.lookup_predicate(name, arity, None)
        if r is not None and r.module is None:
            return r
        return None

    # -- main -----------------------------------------------------------------

    def run(self) -> List[Diagnostic]:
        for dv in self.targets:
            items = self.active_items(dv)
            imp = self.imports_for(items)
            for item, act in items:
                self.check_notes(item, dv.dialect, act, imp)
                if isinstance(item, Directive):
                    self.check_directive(item, dv.dialect, act, imp)
                    if self._is_declaration(item.term):
                        continue
                    self.check_body(item, item.term, item.pos, dv.dialect, act, imp)
                elif isinstance(item, Clause) and item.body is not None:
                    self.check_body(item, item.body, item.pos.arg(1) if item.pos else None, dv.dialect, act, imp)
        out = []
        for f in self.findings.values():
            severity = _SEVERITY.get(f.rule, "warning")
            if not f.certain and severity == "error":
                severity = "warning"
            out.append(Diagnostic(f.rule, f.span, severity, f.message, tuple(sorted(f.dialects)), f.fix))
        out.sort(key=Diagnostic.sort_key)
        return out

    @staticmethod
    def _is_declaration(goal: Term) -> bool:
        info = goal_indicator(goal)
        return info is not None and info[1] in (
            "module", "use_module", "ensure_loaded", "op", "dynamic", "discontiguous",
            "multifile", "block", "meta_predicate", "mode", "set_prolog_flag", "public",
            "volatile", "module_transparent", "table", "license",
        )

    # -- rules ------------------------------------------------------------

    def check_notes(self, item, d: str, act: Activity, imp: _Imports) -> None:
        target = get_profile(d)
        for note in getattr(item, "notes", ()):
            if note.feature in _SYNTAX_MESSAGES:
                if not target.accepts(note.feature):
                    self.add("P005", note.span, _SYNTAX_MESSAGES[note.feature], d, act)
            elif note.feature == "operator_use":
                if target.operator_scope != "module_local":
                    continue
                if note.origin.startswith("library:"):
                    lib = note.origin.split(":", 1)[1]
                    if lib not in imp.libraries:
                        self.add("P006", note.span,
                                 f"operator {note.name} comes from library({lib}), which is not imported", d, act)
                elif note.origin.startswith("file:") and note.detail != "exported":
                    self.add("P006", note.span,
                             f"operator {note.name} is declared in {note.origin[5:]} but not exported", d, act)
            elif note.feature == "double_quoted":
                if note.origin != "default":
                    continue
                src_mode = self.source_profile.double_quotes_default
                if target.double_quotes_default == src_mode:
                    continue
                fix = self.fix_once(("flag", "double_quotes"),
                                    lambda: set_flag_plan(self.model, "double_quotes", src_mode))
                self.add("P007", note.span,
                         f"double-quoted literal relies on the double_quotes default ({src_mode} in the source dialect)",
                         d, act, fix)
            elif note.feature == "list_functor_name":
                if target.list_functor != note.detail:
                    self.add("P008", note.span,
                             f"'{note.detail}' is used directly as a term; it is not the list functor everywhere",
                             d, act)

    def check_directive(self, item: Directive, d: str, act: Activity, imp: _Imports) -> None:
        goal = item.term
        info = goal_indicator(goal)
        if info is None:
            return
        _, name, arity = info
        if name == "block" and arity == 1:
            rec = self.db.lookup_directive("block")
            if rec is None or rec.state(d) == "supported":
                return
            fix = self.fix_once(("block", item.start), lambda: block_fix(self.model, item))
            spec = goal.args[0]
            while isinstance(spec, Compound) and spec.functor == "," and len(spec.args) == 2:
                spec = spec.args[0]
            what = f"{spec.functor}/{len(spec.args)}" if isinstance(spec, Compound) else "predicate"
            self.add("P011", item.span, f"block declaration for {what} is not supported natively; translate to when/2",
                     d, act, fix)
        elif name in ("use_module", "ensure_loaded") and arity in (1, 2):
            for lib_term in self._spec_list(goal.args[0]):
                lib = library_name(lib_term)
                if lib is None:
                    continue
                rec = self.db.lookup_library(lib)
                if rec is None or rec.state(d) != "absent":
                    continue
                note = rec.status[d].note
                fix = self.fix_once(("lib", item.start), lambda: self.guard_import(item, lib))
                msg = f"library({lib}) is not available" + (f"; {note}" if note else "")
                self.add("P004", item.span, msg, d, act, fix)

    def _spec_list(self, t: Term) -> List[Term]:
        view = list_view(t, self.source_profile.list_functor)
        return view[0] if view else [t]

    def guard_import(self, item: Directive, lib: str) -> FixPlan:
        text = self.model.text
        original = text[item.start:item.end]
        cond = f"absolute_file_name(library({lib}), _, [access(exist), file_type(source), file_errors(fail)])"
        replacement = f":- if({cond}).\n  {original}\n:- endif."
        return _plan("conditionalize", text, item.start, item.end, replacement, self.model.file,
                     description=f"load library({lib}) only where it exists")

    def check_body(self, item, body: Term, pos, d: str, act: Activity, imp: _Imports) -> None:
        hashes, persists = [], False
        for goal, gpos in iter_goals(body, pos):
            info = goal_indicator(goal)
            if info is None:
                continue
            module, name, arity = info
            if (name, arity) in PERSISTENCE and module is None:
                persists = True
            rec = self.resolve(module, name, arity, imp)
            if rec is None:
                continue
            span = gpos.span if gpos is not None else item.span
            ind = rec.indicator
            if rec.category == "term_hash":
                hashes.append((rec, span))
            if (name, arity) in imp.shimmed:
                continue
            state = rec.state(d)
            src_state = rec.state(self.source) if self.source in rec.status else "supported"
            if rec.category == "mutable":
                if state != "supported":
                    fix = None
                    if state == "emulatable":
                        shim_id = rec.status[d].shim
                        fix = self.shim_fix(shim_id, d)
                    self.add("P009", span, f"mutable term API {ind} is not native here; SWI can mutate compound arguments instead", d, act, fix)
                continue
            if rec.category == "attvar":
                if state != "supported":
                    self.add("P010", span, f"attributed variable API {ind} is specific to one dialect", d, act)
                continue
            if rec.category == "introspection":
                if d != self.source and "behavior_differs" in (state, src_state) and self._probes_builtin(goal):
                    self.add("P003", span, f"{ind} behaves differently: {rec.note}", d, act)
                continue
            if state in ("absent", "emulatable"):
                fix = None
                msg = f"{ind} is not available"
                if state == "emulatable":
                    shim_id = rec.status[d].shim
                    fix = self.shim_fix(shim_id, d)
                    msg += f"; shim {shim_id} can provide it"
                self.add("P001", span, msg, d, act, fix)
            elif state == "name_differs":
                rep = rec.status[d].replacement
                rep_ind = f"{rep.name}/{rep.arity if rep.arity is not None else arity}"
                if rep.module:
                    rep_ind = f"{rep.module}:{rep_ind}"
                fix = self.clause_fix(item)
                self.add("P002", span, f"{ind} is available as {rep_ind}", d, act, fix)
            elif d != self.source and "behavior_differs" in (state, src_state):
                fix = self.clause_fix(item) if rec.status[d].replacement is not None else None
                self.add("P003", span, f"{ind} behaves differently: {rec.note}", d, act, fix)
        if persists and hashes and len(self.dialect_ids) > 1:
            for rec, span in hashes:
                self.add("P012", span,
                         f"{rec.indicator} values differ between systems but this clause writes them out; "
                         "use a portable hash", d, act)

    def shim_fix(self, shim_id: str, d: str) -> Optional[FixPlan]:
        if self.strategy == "shim":
            return self.fix_once(("shim", shim_id), lambda: shim_plan(self.model, shim_id, d, self.shim_dir))
        return self.fix_once(("shim", shim_id), lambda: inline_shim_plan(self.model, shim_id))

    def _probes_builtin(self, goal: Term) -> bool:
        if not (isinstance(goal, Compound) and len(goal.args) == 1):
            return False
        spec = goal.args[0]
        if isinstance(spec, Compound) and spec.functor == "/" and len(spec.args) == 2:
            n, a = spec.args
            if isinstance(n, Atom) and hasattr(a, "value"):
                r = self.db.lookup_predicate(n.name, a.value, None)
                return r is not None and r.module is None
        return False

    # -- call rewriting fix -------------------------------------------------

    def clause_fix(self, item) -> Optional[FixPlan]:
        if not isinstance(item, Clause):
            return None
        return self.fix_once(("clause", item.start), lambda: self._clause_fix(item))

    def _clause_fix(self, item: Clause) -> Optional[FixPlan]:
        text = self.model.text
        variants: Dict[str, str] = {}
        ordered = sorted(self.targets, key=lambda dv: dv.dialect != self.source)
        body_pos = item.pos.arg(1)
        imp_cache = {}
        for dv in ordered:
            d = dv.dialect
            if d not in imp_cache:
                imp_cache[d] = self.imports_for(self.active_items(dv))
            imp = imp_cache[d]
            edits = []
            for goal, gpos in iter_goals(item.body, body_pos):
                info = goal_indicator(goal)
                if info is None or gpos is None:
                    continue
                rec = self.resolve(info[0], info[1], info[2], imp)
                if rec is None or rec.category:
                    continue
                state = rec.state(d)
                if state == "behavior_differs" and d == self.source:
                    continue
                if state not in ("name_differs", "behavior_differs"):
                    continue
                new_text = renamed_call_text(goal, gpos, rec, d, text, self.index)
                if new_text is None:
                    continue
                sp = gpos.span
                edits.append((self.index.offset(sp.start_line, sp.start_col),
                              self.index.offset(sp.end_line, sp.end_col), new_text))
            variants[d] = splice_region(text, item.start, item.end, edits)
        original = text[item.start:item.end]
        texts = set(variants.values())
        if texts == {original}:
            return None
        if len(texts) == 1:
            return _plan("rename_call", text, item.start, item.end, texts.pop(), self.model.file,
                         description="rename calls for the target dialect")
        return conditionalize([item], variants, self.db, text, self.model.file, self.model)


def analyze(model: SourceModel, targets, db: Catalog, source_dialect: Optional[str] = None,
            shim_dir: str = "shims", strategy: str = "conditional") -> List[Diagnostic]:
    """Diagnostics for ``model`` against ``targets``, sorted by position and rule."""
    return Analyzer(model, targets, db, source_dialect, shim_dir, strategy).run()


def collect_fixes(diagnostics: Iterable[Diagnostic]) -> List[FixPlan]:
    """The distinct fix plans attached to ``diagnostics``, in report order."""
    seen, plans = set(), []
    for d in diagnostics:
        if d.fix is not None and id(d.fix) not in seen:
            seen.add(id(d.fix))
            plans.append(d.fix)
    return plans


def fix_source(text: str, diagnostics: Iterable[Diagnostic]) -> Tuple[str, List[FixPlan], List[FixPlan]]:
    """Apply every non-overlapping fix; returns (patched, applied, skipped)."""
    kept, dropped = select_plans(collect_fixes(diagnostics))
    return apply_fixes(text, kept, "in_place"), kept, dropped
