"""Machine-applicable fixes and span-based patch application.

Every fix is a :class:`FixPlan`: replace the text of one span (whose
original text is recorded, so stale plans are detected) and optionally
create new files.  Insertions are anchored on an existing item and carry
that item's text along, which keeps them detectable as stale too.
"""

from __future__ import annotations

import difflib
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from plport.dialect_db import Catalog, DialectVersion, FeatureRecord
from plport.errors import MalformedBlockSpec, NoConditionAvailable, OverlappingFixes, StaleSpan
from plport.goals import goal_indicator, iter_goals
from plport.lexer import LineIndex
from plport.profiles import canonical_dialect, get_profile
from plport.reader import Clause, Directive, Pos, SourceModel, read_program
from plport.shims import get_shim
from plport.terms import Atom, Compound, SourceSpan, Term, Var
from plport.writer import quote_atom, write_profile, writeq

FIX_KINDS = ("conditionalize", "rename_call", "emit_shim", "translate_block", "set_flag")


@dataclass
class FixPlan:
    kind: str
    target_span: SourceSpan
    replacement: str
    new_files: List[Tuple[str, str]] = field(default_factory=list)
    original: str = ""
    # Insertions keep the anchor text and add ``inserted`` before/after it.
    inserted: Optional[str] = None
    insert_after: bool = False
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind not in FIX_KINDS:
            raise ValueError(f"bad fix kind {self.kind!r}")

    @property
    def is_insertion(self) -> bool:
        return self.inserted is not None

    def key(self) -> tuple:
        return (self.kind, self.target_span, self.replacement, tuple(self.new_files))


def _item_bounds(item, index: LineIndex) -> Tuple[int, int]:
    if isinstance(item, (Clause, Directive)):
        return item.start, item.end
    span = item.span
    return index.offset(span.start_line, span.start_col), index.offset(span.end_line, span.end_col)


def region_bounds(items: Sequence, text: str, file: str = "<string>") -> Tuple[int, int]:
    index = LineIndex(text, file)
    bounds = [_item_bounds(it, index) for it in items]
    return min(b[0] for b in bounds), max(b[1] for b in bounds)


def _plan(kind: str, text: str, start: int, end: int, replacement: str, file: str, **kw) -> FixPlan:
    index = LineIndex(text, file)
    return FixPlan(kind, index.span(start, end), replacement, original=text[start:end], **kw)


# -- conditionalize ------------------------------------------------------------


def _indent(text: str, prefix: str = "  ") -> str:
    return "\n".join(prefix + line if line.strip() else line for line in text.splitlines())


def _head_pattern(name: str, arity: int) -> str:
    fname = quote_atom(name, write_profile("sicstus4"))
    if arity == 0:
        return fname
    return f"{fname}({', '.join(['_'] * arity)})"


def _called_builtins(text: str, dialect: str) -> List[Tuple[str, int]]:
    """Built-in predicates called by clauses in ``text`` (in source order)."""
    try:
        model = read_program(text, dialect)
    except Exception:
        return []
    out = []
    for item in model.walk():
        if isinstance(item, Clause):
            body = item.body
            if body is None:
                continue
            for goal, _ in iter_goals(body, None):
                info = goal_indicator(goal)
                if info and info[0] is None and (info[1], info[2]) not in out:
                    out.append((info[1], info[2]))
    return out


def feature_check(variant_text: str, dialect: str, others: Sequence[str], db: Catalog) -> Optional[str]:
    """A ``predicate_property`` goal true on ``dialect`` and false on all of
    ``others``, built from a predicate the variant calls."""
    for name, arity in _called_builtins(variant_text, dialect):
        r = db.lookup_predicate(name, arity, None)
        if r is None or r.module is not None:
            continue
        if r.state(dialect) != "supported":
            continue
        if all(r.state(o) == "absent" for o in others):
            return f"predicate_property({_head_pattern(name, arity)}, _)"
    return None


def dialect_check(key: str) -> str:
    """Condition text for a variant key ``d`` or ``d>=X.Y.Z``."""
    dialect, _, version = key.partition(">=")
    profile = get_profile(dialect.strip())
    flag = profile.dialect_flag
    if not version:
        return f"current_prolog_flag(dialect, {flag})"
    dv = DialectVersion.parse(f"{profile.id}@{version.strip()}")
    vtext = writeq(dv.version_data, "sicstus4")
    return f"(current_prolog_flag(dialect, {flag}), current_prolog_flag(version_data, V), V @>= {vtext})"


def _parse_key(key: str) -> Tuple[str, Optional[tuple]]:
    if key in ("default", "else"):
        return "default", None
    dialect, sep, version = key.partition(">=")
    try:
        d = canonical_dialect(dialect.strip())
    except ValueError:
        raise NoConditionAvailable(f"cannot build a condition for variant {key!r}") from None
    if not sep:
        return d, None
    try:
        return d, tuple(int(p) for p in version.strip().split("."))
    except ValueError:
        raise NoConditionAvailable(f"bad version in variant {key!r}") from None


def build_conditional(variants: Dict[str, str], db: Catalog) -> str:
    """The if/elif/else text selecting between ``variants``."""
    parsed = {}
    seen = set()
    for key in variants:
        pk = _parse_key(key)
        if pk in seen:
            raise NoConditionAvailable(f"variants {key!r} cannot be told apart from an earlier one")
        seen.add(pk)
        parsed[key] = pk
    default_key = next((k for k, p in parsed.items() if p[0] == "default"), None)
    keyed = [k for k in variants if k != default_key]
    # More specific (versioned) variants first, newest version first.
    keyed.sort(key=lambda k: (parsed[k][1] is None, tuple(-x for x in (parsed[k][1] or ()))))
    if not keyed:
        raise NoConditionAvailable("no dialect-specific variant")

    plain = all(parsed[k][1] is None for k in keyed)
    branches: List[Tuple[Optional[str], str]] = []
    remaining = list(keyed)
    if plain:
        while remaining:
            if len(remaining) == 1 and default_key is None:
                branches.append((None, variants[remaining[0]]))
                break
            chosen = None
            for k in remaining:
                others = [parsed[o][0] for o in remaining if o != k]
                if default_key is not None:
                    others = [d for d in ("sicstus4", "swi8") if d != parsed[k][0]]
                cond = feature_check(variants[k], parsed[k][0], others, db) if others else None
                if cond:
                    chosen = (k, cond)
                    break
            if chosen is None:
                k = remaining[0]
                chosen = (k, dialect_check(parsed[k][0]))
            branches.append((chosen[1], variants[chosen[0]]))
            remaining.remove(chosen[0])
    else:
        for i, k in enumerate(keyed):
            d, version = parsed[k]
            if i == len(keyed) - 1 and default_key is None and version is None:
                branches.append((None, variants[k]))
            else:
                key = d if version is None else f"{d}>={'.'.join(map(str, version))}"
                branches.append((dialect_check(key), variants[k]))
    if default_key is not None:
        branches.append((None, variants[default_key]))

    lines = []
    for i, (cond, text) in enumerate(branches):
        if cond is None:
            lines.append(":- else.")
        elif i == 0:
            lines.append(f":- if({cond}).")
        else:
            lines.append(f":- elif({cond}).")
        lines.append(_indent(text))
    lines.append(":- endif.")
    return "\n".join(lines)


def _comments_within(model_or_text, start: int, end: int, items, text: str) -> List[str]:
    """Comments inside [start, end) that are not part of any item's own text."""
    comments = getattr(model_or_text, "comments", None) or []
    index = LineIndex(text)
    inside = [_item_bounds(it, index) for it in items]
    out = []
    for cs, ce in comments:
        if start <= cs and ce <= end and not any(s <= cs and ce <= e for s, e in inside):
            out.append(text[cs:ce].rstrip("\n"))
    return out


def conditionalize(
    region: Sequence,
    variants: Dict[str, str],
    db: Catalog,
    source_text: str,
    file: str = "<string>",
    model: Optional[SourceModel] = None,
) -> FixPlan:
    """Wrap dialect variants of ``region`` in ``:- if/else/endif``.

    ``variants`` maps a dialect id (optionally ``dialect>=X.Y.Z``) or
    ``default`` to replacement text.  A feature check is used when the
    catalog provides one; a dialect flag test otherwise.
    """
    if not region:
        raise ValueError("empty region")
    start, end = region_bounds(region, source_text, file)
    original = source_text[start:end]
    texts = set(variants.values())
    if len(texts) <= 1:
        replacement = next(iter(texts)) if texts else original
        return _plan("conditionalize", source_text, start, end, replacement, file,
                     description="single variant; no conditional needed")
    body = build_conditional(variants, db)
    comments = _comments_within(model, start, end, region, source_text) if model else []
    replacement = "\n".join(comments + [body]) if comments else body
    return _plan("conditionalize", source_text, start, end, replacement, file)


# -- renaming calls -------------------------------------------------------------


def rename_call(goal: Term, record: FeatureRecord, target: str) -> Term:
    """Rewrite a call to ``record``'s predicate into its ``target`` form."""
    target = canonical_dialect(target)
    status = record.status.get(target)
    if status is None or status.replacement is None:
        return goal
    if status.state not in ("name_differs", "behavior_differs"):
        return goal
    module, inner = None, goal
    if isinstance(goal, Compound) and goal.functor == ":" and len(goal.args) == 2:
        module, inner = goal.args[0], goal.args[1]
    info = goal_indicator(inner)
    if info is None or info[1] != record.name or (record.arity is not None and info[2] != record.arity):
        return goal
    args = inner.args if isinstance(inner, Compound) else ()
    if status.permutation:
        args = tuple(args[p - 1] for p in status.permutation)
    rep = status.replacement
    new_inner: Term = Compound(rep.name, args) if args else Atom(rep.name)
    if module is not None and rep.module:
        return Compound(":", (Atom(rep.module), new_inner))
    return new_inner


def renamed_call_text(goal: Term, pos: Pos, record: FeatureRecord, target: str, text: str,
                      index: LineIndex) -> Optional[str]:
    """Source text for the rewritten call, reusing the argument texts."""
    new_goal = rename_call(goal, record, target)
    if new_goal == goal:
        return None
    status = record.status[canonical_dialect(target)]
    qualified = isinstance(goal, Compound) and goal.functor == ":" and len(goal.args) == 2
    inner_pos = pos.arg(1) if qualified else pos
    inner = goal.args[1] if qualified else goal
    arg_texts = []
    if isinstance(inner, Compound):
        for i in range(len(inner.args)):
            sp = inner_pos.arg(i).span
            arg_texts.append(text[index.offset(sp.start_line, sp.start_col):index.offset(sp.end_line, sp.end_col)])
        if status.permutation:
            arg_texts = [arg_texts[p - 1] for p in status.permutation]
    rep = status.replacement
    name = quote_atom(rep.name, write_profile("sicstus4"))
    call = f"{name}({', '.join(arg_texts)})" if arg_texts else name
    if qualified and rep.module:
        call = f"{quote_atom(rep.module, write_profile('sicstus4'))}:{call}"
    return call


def splice(text: str, edits: Sequence[Tuple[int, int, str]]) -> str:
    for s, e, rep in sorted(edits, key=lambda x: x[0], reverse=True):
        text = text[:s] + rep + text[e:]
    return text


# -- block translation ------------------------------------------------------


def _block_specs(directive_goal: Term, span: Optional[SourceSpan]) -> List[Compound]:
    if not (isinstance(directive_goal, Compound) and directive_goal.functor == "block" and len(directive_goal.args) == 1):
        raise MalformedBlockSpec(span, "not a block directive")
    specs, stack = [], [directive_goal.args[0]]
    while stack:
        t = stack.pop()
        if isinstance(t, Compound) and t.functor == "," and len(t.args) == 2:
            stack.extend(reversed(t.args))
        else:
            specs.append(t)
    return specs


def wake_condition(specs: Sequence[Term], args: Sequence[Var], span: Optional[SourceSpan] = None) -> Optional[Term]:
    """Conjunction over specs of the disjunction of nonvar(Ai) at '-' positions."""
    conjuncts = []
    for spec in specs:
        if not isinstance(spec, Compound):
            raise MalformedBlockSpec(span, "block spec must be a compound term")
        positions = []
        for i, a in enumerate(spec.args):
            if a == Atom("-"):
                positions.append(i)
            elif a != Atom("?"):
                raise MalformedBlockSpec(span, "block spec argument must be '-' or '?'")
        if positions:
            conjuncts.append(_nest(";", [Compound("nonvar", (args[i],)) for i in positions]))
    if not conjuncts:
        return None
    return _nest(",", conjuncts)


def _nest(op: str, items: List[Term]) -> Term:
    out = items[-1]
    for t in reversed(items[:-1]):
        out = Compound(op, (t, out))
    return out


def _check_specs(specs: Sequence[Term], span: Optional[SourceSpan]) -> Tuple[str, int]:
    key = None
    for spec in specs:
        if not isinstance(spec, Compound):
            raise MalformedBlockSpec(span, "block spec must be a compound term")
        k = (spec.functor, len(spec.args))
        if key is None:
            key = k
        elif k != key:
            raise MalformedBlockSpec(span, "block specs name different predicates")
        for a in spec.args:
            if a not in (Atom("-"), Atom("?")):
                raise MalformedBlockSpec(span, "block spec argument must be '-' or '?'")
    if key is None:
        raise MalformedBlockSpec(span, "empty block directive")
    return key


def unblocked_name(name: str, taken: set) -> str:
    base = f"{name}__unblocked"
    if base not in taken:
        return base
    i = 2
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def _rename_head(clause_term: Term, new_name: str) -> Term:
    if isinstance(clause_term, Compound) and clause_term.functor in (":-", "-->") and len(clause_term.args) == 2:
        head = clause_term.args[0]
        return Compound(clause_term.functor, (Compound(new_name, head.args), clause_term.args[1]))
    return Compound(new_name, clause_term.args)


def translate_block_directive(
    specs: Sequence[Term], clauses: Sequence[Clause], taken: Optional[set] = None,
    span: Optional[SourceSpan] = None,
) -> List[Term]:
    """Return ``[wrapper] + renamed clauses`` as clause terms."""
    name, arity = _check_specs(specs, span)
    for c in clauses:
        head = c.head
        if not (isinstance(head, Compound) and head.functor == name and len(head.args) == arity):
            raise MalformedBlockSpec(span, f"clause for {goal_indicator(head)} does not match {name}/{arity}")
    new_name = unblocked_name(name, set(taken or ()))
    args = tuple(Var(f"A{i + 1}", i) for i in range(arity))
    cond = wake_condition(specs, args, span)
    call = Compound(new_name, args)
    body = call if cond is None else Compound("when", (cond, call))
    wrapper = Compound(":-", (Compound(name, args), body))
    return [wrapper] + [_rename_head(c.term, new_name) for c in clauses]


def wrapper_text(name: str, arity: int, cond: Optional[Term], new_name: str) -> str:
    arg_names = [f"A{i + 1}" for i in range(arity)]
    vars_ = {Var(n, i): n for i, n in enumerate(arg_names)}
    fname = quote_atom(name, write_profile("sicstus4"))
    head = f"{fname}({', '.join(arg_names)})"
    call = f"{quote_atom(new_name, write_profile('sicstus4'))}({', '.join(arg_names)})"
    if cond is None:
        return f"{head} :-\n    {call}."
    cond_text = writeq(cond, "sicstus4", vars_)
    if isinstance(cond, Compound) and cond.functor in (",", ";") and len(cond.args) == 2:
        cond_text = f"({cond_text})"
    return f"{head} :-\n    when({cond_text}, {call})."


def defined_names(model: SourceModel) -> set:
    names = set()
    for item in model.walk():
        if isinstance(item, Clause):
            info = goal_indicator(item.head)
            if info:
                names.add(info[1])
    return names


def block_fix(model: SourceModel, directive: Directive) -> FixPlan:
    text = model.text
    index = LineIndex(text, model.file)
    specs = _block_specs(directive.term, directive.span)
    name, arity = _check_specs(specs, directive.span)
    clauses = [
        c for c in model.walk()
        if isinstance(c, Clause) and isinstance(c.head, Compound)
        and c.head.functor == name and len(c.head.args) == arity
    ]
    new_name = unblocked_name(name, defined_names(model))
    args = tuple(Var(f"A{i + 1}", i) for i in range(arity))
    cond = wake_condition(specs, args, directive.span)
    start = min([directive.start] + [c.start for c in clauses])
    end = max([directive.end] + [c.end for c in clauses])
    directive_text = text[directive.start:directive.end].replace("\n", " ")
    edits = [(directive.start, directive.end,
              f"% translated from {directive_text}\n" + wrapper_text(name, arity, cond, new_name))]
    for c in clauses:
        hpos = c.pos.arg(0) if c.term is not c.head else c.pos
        hs = index.offset(hpos.span.start_line, hpos.span.start_col)
        # The functor token runs up to the opening parenthesis.
        paren = text.index("(", hs)
        edits.append((hs, paren, quote_atom(new_name, write_profile("sicstus4"))))
    region = splice_region(text, start, end, edits)
    return _plan("translate_block", text, start, end, region, model.file,
                 description=f"translate block declaration for {name}/{arity} to when/2")


def splice_region(text: str, start: int, end: int, edits) -> str:
    local = [(s - start, e - start, rep) for s, e, rep in edits]
    return splice(text[start:end], local)


# -- shims and inserted directives ------------------------------------------


def emit_feature_shim(shim_id: str, target: str = "swi8", shim_dir: str = "shims") -> Tuple[str, str]:
    shim = get_shim(shim_id)
    canonical_dialect(target)
    return os.path.join(shim_dir, f"{shim.id}.pl"), shim.module_text()


def _anchor(model: SourceModel) -> Tuple[object, bool]:
    """Item to anchor insertions on, and whether to insert after it."""
    first = model.items[0]
    if isinstance(first, Directive) and isinstance(first.term, Compound) and first.term.functor == "module":
        return first, True
    return first, False


def insertion_plan(model: SourceModel, kind: str, inserted: str, new_files=(), description: str = "") -> FixPlan:
    if not model.items:
        raise ValueError("cannot anchor an insertion in an empty file")
    text = model.text
    anchor, after = _anchor(model)
    start, end = region_bounds([anchor], text, model.file)
    original = text[start:end]
    replacement = f"{original}\n{inserted}" if after else f"{inserted}\n{original}"
    return FixPlan(
        kind, LineIndex(text, model.file).span(start, end), replacement, list(new_files),
        original=original, inserted=inserted, insert_after=after, description=description,
    )


def shim_loader(shim_id: str, module_path: str) -> str:
    shim = get_shim(shim_id)
    name, arity = shim.probe
    path = quote_atom(module_path, write_profile("sicstus4"))
    return (
        f":- if(\\+ predicate_property({_head_pattern(name, arity)}, _)).\n"
        f":- use_module({path}).\n"
        f":- endif."
    )


def shim_plan(model: SourceModel, shim_id: str, target: str, shim_dir: str = "shims") -> FixPlan:
    source_dir = os.path.dirname(model.file) if model.file not in ("", "<string>") else ""
    rel_path, text = emit_feature_shim(shim_id, target, shim_dir)
    full = rel_path if os.path.isabs(shim_dir) else os.path.join(source_dir, rel_path)
    module_path = os.path.relpath(full, source_dir or ".")[: -len(".pl")]
    module_path = module_path.replace(os.sep, "/")
    return insertion_plan(model, "emit_shim", shim_loader(shim_id, module_path), [(full, text)],
                          description=f"load shim {shim_id}")


def inline_shim_plan(model: SourceModel, shim_id: str) -> FixPlan:
    """Like :func:`shim_plan` but puts the shim clauses into the file itself."""
    shim = get_shim(shim_id)
    name, arity = shim.probe
    inserted = (
        f":- if(\\+ predicate_property({_head_pattern(name, arity)}, _)).\n"
        f"{shim.body.rstrip()}\n"
        f":- endif."
    )
    return insertion_plan(model, "emit_shim", inserted, description=f"inline shim {shim_id}")


def set_flag_plan(model: SourceModel, flag: str, value: str) -> FixPlan:
    return insertion_plan(model, "set_flag", f":- set_prolog_flag({flag}, {value}).",
                          description=f"set {flag} explicitly")


def merge_insertions(plans: Sequence[FixPlan]) -> List[FixPlan]:
    """Combine insertion plans anchored on the same span into one plan."""
    out: List[FixPlan] = []
    by_span: Dict[SourceSpan, FixPlan] = {}
    for p in plans:
        if not p.is_insertion:
            out.append(p)
            continue
        prev = by_span.get(p.target_span)
        if prev is None:
            merged = FixPlan(p.kind, p.target_span, p.replacement, list(p.new_files), p.original,
                             p.inserted, p.insert_after, p.description)
            by_span[p.target_span] = merged
            out.append(merged)
            continue
        if p.inserted in prev.inserted.split("\n"):
            continue
        prev.inserted = f"{prev.inserted}\n{p.inserted}"
        prev.new_files.extend(f for f in p.new_files if f not in prev.new_files)
        prev.replacement = (
            f"{prev.original}\n{prev.inserted}" if prev.insert_after else f"{prev.inserted}\n{prev.original}"
        )
    return out


# -- application ---------------------------------------------------------------


def _offsets(text: str, plan: FixPlan) -> Tuple[int, int]:
    index = LineIndex(text)
    sp = plan.target_span
    try:
        start = index.offset(sp.start_line, sp.start_col)
        end = index.offset(sp.end_line, sp.end_col)
    except (IndexError, ValueError):
        raise StaleSpan(f"span {sp} is outside the file") from None
    if end > len(text):
        raise StaleSpan(f"span {sp} is outside the file")
    return start, end


def apply_fixes(text: str, plans: Sequence[FixPlan], mode: str = "in_place", path: str = "file") -> str:
    """Splice ``plans`` into ``text``; ``mode='diff'`` returns a unified diff."""
    if mode not in ("in_place", "diff"):
        raise ValueError(f"bad mode {mode!r}")
    located = []
    for plan in plans:
        start, end = _offsets(text, plan)
        if text[start:end] != plan.original:
            raise StaleSpan(f"text at {plan.target_span} no longer matches the planned fix")
        located.append((start, end, plan))
    located.sort(key=lambda x: (x[0], x[1]))
    for (s1, e1, p1), (s2, e2, p2) in zip(located, located[1:]):
        if s2 < e1 or (s1 == s2 and e1 == e2):
            raise OverlappingFixes(f"fixes at {p1.target_span} and {p2.target_span} overlap")
    patched = splice(text, [(s, e, p.replacement) for s, e, p in located])
    if mode == "in_place":
        return patched
    return unified_diff(text, patched, path)


def select_plans(plans: Sequence[FixPlan]) -> Tuple[List[FixPlan], List[FixPlan]]:
    """Merge insertions, then keep plans greedily in position order, dropping
    any that overlap an earlier one.  Returns (kept, dropped)."""
    def key(p: FixPlan):
        s = p.target_span
        return (s.start_line, s.start_col, s.end_line, s.end_col)

    kept: List[FixPlan] = []
    dropped: List[FixPlan] = []
    last_end = None
    for p in sorted(merge_insertions(plans), key=key):
        s = p.target_span
        if last_end is not None and (s.start_line, s.start_col) < last_end:
            dropped.append(p)
            continue
        kept.append(p)
        last_end = (s.end_line, s.end_col)
    return kept, dropped


def unified_diff(old: str, new: str, path: str, old_label: Optional[str] = None) -> str:
    lines = difflib.unified_diff(
        old.splitlines(keepends=True),
        new.splitlines(keepends=True),
        fromfile=old_label or f"a/{path.lstrip('/')}",
        tofile=f"b/{path.lstrip('/')}",
        n=3,
    )
    out = []
    for line in lines:
        out.append(line if line.endswith("\n") else line + "\n\\ No newline at end of file\n")
    return "".join(out)
