"""Operator-precedence term reader and whole-program reader.

``read_program`` turns a file into a :class:`SourceModel`: clauses and
directives annotated with spans, with ``:- if/elif/else/endif`` sequences
folded into :class:`CondBlock` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from plport.errors import LexError, ParseError, UnbalancedConditional
from plport.lexer import Lexer, LineIndex, SyntaxNote, Token
from plport.profiles import DialectProfile, OperatorDef, OperatorTable, get_profile
from plport.terms import (
    NIL,
    Atom,
    Compound,
    Float,
    Int,
    SourceSpan,
    Str,
    Term,
    Var,
    list_view,
    make_list,
)

DQ_MODES = ("codes", "chars", "atom", "string")

_TERM_START = frozenset(
    ["name", "var", "int", "float", "string", "backquote", "open", "open_list", "open_curly"]
)
_CLOSERS = frozenset(["close", "close_list", "close_curly", "comma", "bar", "end"])


@dataclass(frozen=True)
class Pos:
    """Source layout of a term: its span plus one ``Pos`` per argument."""

    span: SourceSpan
    args: Tuple["Pos", ...] = ()

    def arg(self, i: int) -> "Pos":
        return self.args[i] if i < len(self.args) else Pos(self.span)


@dataclass
class Clause:
    term: Term
    span: SourceSpan
    var_names: Dict[str, Var] = field(default_factory=dict)
    pos: Optional[Pos] = None
    notes: List[SyntaxNote] = field(default_factory=list)
    start: int = 0
    end: int = 0

    @property
    def head(self) -> Term:
        if isinstance(self.term, Compound) and self.term.functor == ":-" and self.term.arity == 2:
            return self.term.args[0]
        if isinstance(self.term, Compound) and self.term.functor == "-->" and self.term.arity == 2:
            return self.term.args[0]
        return self.term

    @property
    def body(self) -> Optional[Term]:
        if isinstance(self.term, Compound) and self.term.functor == ":-" and self.term.arity == 2:
            return self.term.args[1]
        return None


@dataclass
class Directive:
    term: Term
    span: SourceSpan
    var_names: Dict[str, Var] = field(default_factory=dict)
    pos: Optional[Pos] = None
    notes: List[SyntaxNote] = field(default_factory=list)
    start: int = 0
    end: int = 0


@dataclass
class Branch:
    condition: Optional[Term]  # None marks the else branch
    items: List["Item"]
    span: SourceSpan
    pos: Optional[Pos] = None
    notes: List[SyntaxNote] = field(default_factory=list)

    @property
    def is_else(self) -> bool:
        return self.condition is None


@dataclass
class CondBlock:
    branches: List[Branch]
    span: SourceSpan


Item = Union[Clause, Directive, CondBlock]


@dataclass
class SourceModel:
    items: List[Item]
    file: str = "<string>"
    profile_id: str = "sicstus4"
    text: str = ""
    module: Optional[str] = None
    exports: List[Term] = field(default_factory=list)
    declared_ops: List[OperatorDef] = field(default_factory=list)
    comments: List[Tuple[int, int]] = field(default_factory=list)

    def walk(self):
        """Yield every clause and directive, including those inside blocks."""
        stack = list(reversed(self.items))
        while stack:
            item = stack.pop()
            if isinstance(item, CondBlock):
                for branch in reversed(item.branches):
                    stack.extend(reversed(branch.items))
            else:
                yield item


class Parser:
    def __init__(
        self,
        tokens: List[Token],
        profile: DialectProfile,
        index: LineIndex,
        ops: Optional[OperatorTable] = None,
        double_quotes: Optional[str] = None,
        file: str = "<string>",
    ):
        self.tokens = tokens
        self.profile = profile
        self.index = index
        self.ops = ops if ops is not None else profile.operator_table()
        self.dq_mode = double_quotes or profile.double_quotes_default
        self.dq_explicit = double_quotes is not None
        self.file = file
        self.i = 0
        self.var_names: Dict[str, Var] = {}
        self.var_count = 0
        self.notes: List[SyntaxNote] = []

    # -- token access --------------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def eof_span(self) -> SourceSpan:
        end = len(self.index.text)
        return self.index.span(end, end)

    def error(self, tok: Optional[Token], expected: str) -> ParseError:
        if tok is None:
            return ParseError(self.eof_span(), f"expected {expected}, found end of file")
        found = tok.kind if tok.kind in ("end",) else f"{tok.kind} {tok.value!r}"
        return ParseError(tok.span, f"expected {expected}, found {found}")

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error(tok, what)
        return self.advance()

    def span(self, start: int, end: int) -> SourceSpan:
        return self.index.span(start, end)

    # -- clause level --------------------------------------------------------

    def read_clause(self, require_end: bool = False) -> Tuple[Term, Pos, int, int]:
        """Parse one clause; returns term, layout, start and end offsets."""
        self.var_names = {}
        self.var_count = 0
        first = self.peek()
        if first is None:
            raise self.error(None, "term")
        term, _, pos = self.parse(1200)
        tok = self.peek()
        if tok is None:
            if require_end:
                raise self.error(None, "operator or end of clause")
            return term, pos, first.start, self.tokens[self.i - 1].end
        if tok.kind != "end":
            raise self.error(tok, "operator or end of clause")
        self.advance()
        return term, pos, first.start, tok.end

    def fresh_var(self, name: str) -> Var:
        if name == "_":
            v = Var("_", self.var_count)
            self.var_count += 1
            return v
        v = self.var_names.get(name)
        if v is None:
            v = Var(name, self.var_count)
            self.var_count += 1
            self.var_names[name] = v
        return v

    # -- operator-precedence core ------------------------------------------

    def parse(self, max_prec: int, arg: bool = False) -> Tuple[Term, int, Pos]:
        """Parse a term of priority at most ``max_prec``.

        ``arg`` marks argument and list-element context: there ``,`` and ``|``
        end the term, but other operators up to 1200 are accepted the way
        both dialects accept ``f(a:-b)``.
        """
        left, left_prec, pos = self.parse_primary(max_prec, arg)
        return self.parse_infix(left, left_prec, pos, max_prec, arg)

    def note_op(self, op: OperatorDef, tok: Token) -> None:
        if op.origin == "builtin" or op.origin == f"file:{self.file}":
            return
        detail = "exported" if op.exported else ""
        self.notes.append(SyntaxNote("operator_use", tok.span, detail, op.name, op.origin))

    def parse_infix(self, left: Term, left_prec: int, pos: Pos, max_prec: int, arg: bool = False):
        while True:
            tok = self.peek()
            if tok is None:
                break
            name = None
            if tok.kind == "name":
                name = tok.value
            elif tok.kind == "comma" and not arg:
                name = ","
            elif tok.kind == "bar" and not arg:
                name = "|"
            if name is None:
                break
            op = self.ops.infix(name)
            if op is not None:
                p = op.priority
                la = p - 1 if op.type in ("xfx", "xfy") else p
                ra = p - 1 if op.type in ("xfx", "yfx") else p
                if p <= max_prec and left_prec <= la:
                    nxt = self.peek(1)
                    if nxt is not None and nxt.kind in _TERM_START:
                        self.advance()
                        self.note_op(op, tok)
                        right, _, rpos = self.parse(ra, arg)
                        functor = ";" if name == "|" and tok.kind == "bar" else name
                        left = Compound(functor, (left, right))
                        pos = Pos(pos.span.join(rpos.span), (pos, rpos))
                        left_prec = p
                        continue
            op = self.ops.postfix(name)
            if op is not None:
                p = op.priority
                la = p - 1 if op.type == "xf" else p
                if p <= max_prec and left_prec <= la:
                    self.advance()
                    self.note_op(op, tok)
                    left = Compound(name, (left,))
                    pos = Pos(pos.span.join(tok.span), (pos,))
                    left_prec = p
                    continue
            break
        return left, left_prec, pos

    def parse_arglist(self) -> Tuple[List[Term], List[Pos], Token]:
        args, poss = [], []
        while True:
            t, _, p = self.parse(1200, arg=True)
            args.append(t)
            poss.append(p)
            tok = self.peek()
            if tok is not None and tok.kind == "comma":
                self.advance()
                continue
            close = self.expect("close", "',' or ')'")
            return args, poss, close

    def parse_primary(self, max_prec: int, arg: bool = False) -> Tuple[Term, int, Pos]:
        tok = self.peek()
        if tok is None:
            raise self.error(None, "term")
        kind = tok.kind

        if kind in ("int", "float"):
            self.advance()
            t = Int(tok.value) if kind == "int" else Float(tok.value)
            return t, 0, Pos(tok.span)

        if kind == "var":
            self.advance()
            return self.fresh_var(tok.value), 0, Pos(tok.span)

        if kind == "string":
            self.advance()
            origin = "flag" if self.dq_explicit else "default"
            self.notes.append(SyntaxNote("double_quoted", tok.span, self.dq_mode, tok.value, origin))
            return self.convert_dq(tok.value, self.dq_mode), 0, Pos(tok.span)

        if kind == "backquote":
            self.advance()
            return self.convert_dq(tok.value, "codes"), 0, Pos(tok.span)

        if kind == "open":
            self.advance()
            t, _, p = self.parse(1200)
            close = self.expect("close", "')'")
            return t, 0, Pos(self.span(tok.start, close.end), p.args)

        if kind == "open_list":
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind == "close_list":
                self.advance()
                return self.after_name(NIL, tok, self.span(tok.start, nxt.end), nxt.end, max_prec)
            return self.parse_list(tok)

        if kind == "open_curly":
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind == "close_curly":
                self.advance()
                return self.after_name("{}", tok, self.span(tok.start, nxt.end), nxt.end, max_prec)
            t, _, p = self.parse(1200)
            close = self.expect("close_curly", "'}'")
            return Compound("{}", (t,)), 0, Pos(self.span(tok.start, close.end), (p,))

        if kind == "name":
            self.advance()
            if tok.quoted and tok.value in (".", "[|]"):
                self.notes.append(SyntaxNote("list_functor_name", tok.span, tok.value))
            # Negative numeric literal: '-' directly followed by a number.
            nxt = self.peek()
            if (
                tok.value == "-"
                and not tok.quoted
                and nxt is not None
                and nxt.kind in ("int", "float")
                and nxt.start == tok.end
            ):
                self.advance()
                t = Int(-nxt.value) if nxt.kind == "int" else Float(-nxt.value)
                return t, 0, Pos(self.span(tok.start, nxt.end))
            return self.after_name(tok.value, tok, tok.span, tok.end, max_prec, arg)

        if kind == "comma":
            raise self.error(tok, "term")
        if kind == "bar":
            raise self.error(tok, "term")
        raise self.error(tok, "term")

    def after_name(self, name: str, tok: Token, span: SourceSpan, end: int, max_prec: int, arg: bool = False):
        nxt = self.peek()
        # Functional notation: name immediately followed by '('.
        if nxt is not None and nxt.kind == "open" and not nxt.layout_before:
            self.advance()
            args, poss, close = self.parse_arglist()
            return Compound(name, tuple(args)), 0, Pos(self.span(tok.start, close.end), tuple(poss))

        op = self.ops.prefix(name) if not (tok.kind == "open_list" or tok.kind == "open_curly") else None
        if op is not None and self.can_start_operand(nxt):
            p = op.priority
            if p > max_prec:
                p = max_prec
            arg_max = p - 1 if op.type == "fx" else p
            self.note_op(op, tok)
            operand, _, apos = self.parse(arg_max, arg)
            return Compound(name, (operand,)), p, Pos(span.join(apos.span), (apos,))

        prec = 0
        if op is not None or self.ops.infix(name) or self.ops.postfix(name):
            # A bare operator atom; keep it usable as an argument.
            prec = 0
        return Atom(name), prec, Pos(span)

    def can_start_operand(self, nxt: Optional[Token]) -> bool:
        if nxt is None or nxt.kind not in _TERM_START:
            return False
        if nxt.kind == "name":
            following = self.peek(1)
            functional = following is not None and following.kind == "open" and not following.layout_before
            if functional:
                return True
            infix = self.ops.infix(nxt.value) or self.ops.postfix(nxt.value)
            if infix and not self.ops.prefix(nxt.value):
                # e.g. "- = x": the prefix operator is an atom operand of '='.
                after = self.peek(1)
                return after is None or after.kind in _CLOSERS
        return True

    def parse_list(self, open_tok: Token) -> Tuple[Term, int, Pos]:
        items, poss = [], []
        tail: Term = Atom(NIL)
        tail_pos: Optional[Pos] = None
        while True:
            t, _, p = self.parse(1200, arg=True)
            items.append(t)
            poss.append(p)
            tok = self.peek()
            if tok is not None and tok.kind == "comma":
                self.advance()
                continue
            if tok is not None and tok.kind == "bar":
                self.advance()
                tail, _, tail_pos = self.parse(1200, arg=True)
                tok = self.peek()
            close = self.expect("close_list", "',', '|' or ']'")
            break
        full = self.span(open_tok.start, close.end)
        end_span = close.span
        functor = self.profile.list_functor
        term = make_list(items, tail, functor)
        # Layout for each cons cell: (head, tail).
        pos = tail_pos or Pos(end_span)
        for p in reversed(poss):
            pos = Pos(p.span.join(end_span), (p, pos))
        return term, 0, Pos(full, pos.args)

    def convert_dq(self, text: str, mode: str) -> Term:
        functor = self.profile.list_functor
        if mode == "codes":
            return make_list([Int(ord(c)) for c in text], functor=functor)
        if mode == "chars":
            return make_list([Atom(c) for c in text], functor=functor)
        if mode == "atom":
            return Atom(text)
        return Str(text)


def _lex(text: str, profile: DialectProfile, file: str) -> Tuple[List[Token], Lexer]:
    lexer = Lexer(text, profile, file)
    return lexer.tokens(), lexer


def read_term(
    text: str,
    profile: Union[DialectProfile, str] = "sicstus4",
    overrides: Optional[str] = None,
    ops: Optional[OperatorTable] = None,
    file: str = "<string>",
) -> Tuple[Term, Dict[str, Var], SourceSpan]:
    """Read exactly one term; the terminating ``.`` may be omitted."""
    if isinstance(profile, str):
        profile = get_profile(profile)
    if overrides is not None and overrides not in DQ_MODES:
        raise ValueError(f"bad double_quotes mode {overrides!r}")
    tokens, lexer = _lex(text, profile, file)
    parser = Parser(tokens, profile, lexer.index, ops, overrides, file)
    term, _, start, end = parser.read_clause()
    if parser.peek() is not None:
        raise parser.error(parser.peek(), "end of input")
    return term, dict(parser.var_names), lexer.index.span(start, end)


def read_terms(
    text: str,
    profile: Union[DialectProfile, str] = "sicstus4",
    overrides: Optional[str] = None,
    file: str = "<string>",
) -> List[Tuple[Term, Dict[str, Var], SourceSpan]]:
    """Read every ``.``-terminated term in ``text`` (no directive handling)."""
    if isinstance(profile, str):
        profile = get_profile(profile)
    tokens, lexer = _lex(text, profile, file)
    parser = Parser(tokens, profile, lexer.index, None, overrides, file)
    out = []
    while parser.peek() is not None:
        term, _, start, end = parser.read_clause()
        out.append((term, dict(parser.var_names), lexer.index.span(start, end)))
    return out


# -- program reader ----------------------------------------------------------


def _atom_list(t: Term, list_functor: str) -> List[Term]:
    view = list_view(t, list_functor)
    if view is None:
        return [] if t == Atom(NIL) else [t]
    return view[0]


def _unqualify(t: Term) -> Tuple[Optional[str], Term]:
    if isinstance(t, Compound) and t.functor == ":" and t.arity == 2 and isinstance(t.args[0], Atom):
        return t.args[0].name, t.args[1]
    return None, t


def library_name(t: Term) -> Optional[str]:
    """``library(clpfd)`` -> ``"clpfd"``; also handles ``library(a/b)``."""
    if isinstance(t, Compound) and t.functor == "library" and t.arity == 1:
        arg = t.args[0]
        if isinstance(arg, Atom):
            return arg.name
        parts = []
        while isinstance(arg, Compound) and arg.functor == "/" and arg.arity == 2:
            if not isinstance(arg.args[1], Atom):
                return None
            parts.append(arg.args[1].name)
            arg = arg.args[0]
        if isinstance(arg, Atom):
            parts.append(arg.name)
            return "/".join(reversed(parts))
    return None


class ProgramReader:
    def __init__(self, text: str, profile: DialectProfile, file: str, ops: Optional[OperatorTable]):
        self.text = text
        self.profile = profile
        self.file = file
        self.ops = ops if ops is not None else profile.operator_table()
        tokens, lexer = _lex(text, profile, file)
        self.lexer = lexer
        self.parser = Parser(tokens, profile, lexer.index, self.ops, None, file)
        self.model = SourceModel([], file, profile.id, text, comments=list(lexer.comments))
        self.lex_notes = list(lexer.notes)

    def apply_op_directive(self, goal: Term, exported: bool = False) -> None:
        if not (isinstance(goal, Compound) and goal.functor == "op" and goal.arity == 3):
            return
        prio, op_type, names = goal.args
        if not isinstance(prio, Int) or not isinstance(op_type, Atom):
            return
        for name_term in _atom_list(names, self.profile.list_functor):
            module, name_term = _unqualify(name_term)
            if not isinstance(name_term, Atom):
                continue
            try:
                d = OperatorDef(
                    name_term.name,
                    prio.value,
                    op_type.name,
                    f"file:{self.file}",
                    exported or module == "user",
                )
            except ValueError:
                continue
            self.ops.add(d)
            self.model.declared_ops.append(d)

    def load_library_ops(self, spec: Term) -> None:
        for lib_term in _atom_list(spec, self.profile.list_functor):
            lib = library_name(lib_term)
            for d in self.profile.library_operators.get(lib or "", ()):
                existing = self.ops.get(d.name, d.kind)
                if existing is None or existing.origin == d.origin:
                    self.ops.add(d)

    def process_directive(self, goal: Term) -> None:
        _, goal = _unqualify(goal)
        if not isinstance(goal, Compound):
            return
        f, n = goal.functor, goal.arity
        if f == "op" and n == 3:
            self.apply_op_directive(goal)
        elif f == "module" and n in (2, 3):
            if isinstance(goal.args[0], Atom):
                self.model.module = goal.args[0].name
            for exp in _atom_list(goal.args[1], self.profile.list_functor):
                self.model.exports.append(exp)
                if isinstance(exp, Compound) and exp.functor == "op" and exp.arity == 3:
                    self.apply_op_directive(exp, exported=True)
        elif f in ("use_module", "ensure_loaded") and n in (1, 2):
            self.load_library_ops(goal.args[0])
        elif f == "set_prolog_flag" and n == 2:
            flag, value = goal.args
            if flag == Atom("double_quotes") and isinstance(value, Atom) and value.name in DQ_MODES:
                self.parser.dq_mode = value.name
                self.parser.dq_explicit = True

    def notes_for(self, start: int, end: int) -> List[SyntaxNote]:
        lo = self.lexer.index.span(start, end)
        mine = [n for n in self.lex_notes if lo.covers(n.span)]
        return mine

    def read(self) -> SourceModel:
        parser = self.parser
        # Stack of open blocks: (CondBlock, start offset of its `if`).
        stack: List[Tuple[CondBlock, Token]] = []
        top: List[Item] = self.model.items

        def current() -> List[Item]:
            return stack[-1][0].branches[-1].items if stack else top

        while parser.peek() is not None:
            parser.notes = []
            first_tok = parser.peek()
            term, pos, start, end = parser.read_clause(require_end=True)
            span = self.lexer.index.span(start, end)
            notes = self.notes_for(start, end) + parser.notes
            var_names = dict(parser.var_names)

            if isinstance(term, Compound) and term.functor == ":-" and term.arity == 1:
                goal = term.args[0]
                gpos = pos.arg(0)
                cond_kind = self.conditional_kind(goal)
                if cond_kind == "if":
                    block = CondBlock([Branch(goal.args[0], [], span, gpos.arg(0), notes)], span)
                    current().append(block)
                    stack.append((block, first_tok))
                    continue
                if cond_kind in ("elif", "else", "endif"):
                    if not stack:
                        raise UnbalancedConditional(span, f":- {cond_kind} without matching :- if")
                    block = stack[-1][0]
                    if cond_kind == "endif":
                        block.span = block.span.join(span)
                        stack.pop()
                        continue
                    if block.branches[-1].is_else:
                        raise UnbalancedConditional(span, f":- {cond_kind} after :- else")
                    cond = goal.args[0] if cond_kind == "elif" else None
                    cpos = gpos.arg(0) if cond_kind == "elif" else None
                    block.branches.append(Branch(cond, [], span, cpos, notes))
                    continue
                self.process_directive(goal)
                current().append(Directive(goal, span, var_names, gpos, notes, start, end))
            else:
                current().append(Clause(term, span, var_names, pos, notes, start, end))

        if stack:
            block, tok = stack[-1]
            raise UnbalancedConditional(block.branches[0].span, ":- if without matching :- endif")
        return self.model

    @staticmethod
    def conditional_kind(goal: Term) -> Optional[str]:
        if isinstance(goal, Compound) and goal.arity == 1 and goal.functor in ("if", "elif"):
            return goal.functor
        if isinstance(goal, Atom) and goal.name in ("else", "endif"):
            return goal.name
        return None


def read_program(
    text: str,
    profile: Union[DialectProfile, str] = "sicstus4",
    file: str = "<string>",
    ops: Optional[OperatorTable] = None,
) -> SourceModel:
    """Parse a whole source file into a :class:`SourceModel`.

    ``ops`` lets a caller share one operator table between files, which is
    how globally scoped operators behave.
    """
    if isinstance(profile, str):
        profile = get_profile(profile)
    return ProgramReader(text, profile, file, ops).read()


def decode_source(data: bytes) -> Tuple[str, Optional[str]]:
    """Decode file bytes as UTF-8, falling back to ISO 8859-1.

    Returns the text and a notice when the fallback was used.
    """
    try:
        return data.decode("utf-8"), None
    except UnicodeDecodeError as exc:
        return data.decode("latin-1"), f"not valid UTF-8 ({exc.reason} at byte {exc.start}); read as ISO 8859-1"


__all__ = [
    "Branch",
    "Clause",
    "CondBlock",
    "Directive",
    "LexError",
    "ParseError",
    "Pos",
    "SourceModel",
    "UnbalancedConditional",
    "decode_source",
    "library_name",
    "read_program",
    "read_term",
    "read_terms",
]
