"""Term output: canonical (re-readable, operator-free) and print modes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

from plport.lexer import GRAPHIC_CHARS
from plport.profiles import OperatorTable, canonical_dialect, get_profile
from plport.terms import (
    LIST_FUNCTORS,
    NIL,
    Atom,
    Compound,
    Float,
    Int,
    Str,
    Term,
    Var,
)

_LETTER_DIGIT = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
_SOLO_ATOMS = frozenset(["[]", "{}", "!", ";"])


@dataclass(frozen=True)
class WriteProfile:
    target: str
    quote_mode: str = "canonical"
    force_list_syntax: bool = True
    escape_nonascii: bool = False
    escape_nonascii_in_quotes: bool = False

    def __post_init__(self) -> None:
        if self.quote_mode not in ("canonical", "print"):
            raise ValueError(f"bad quote mode {self.quote_mode!r}")


def write_profile(target: str, quote_mode: str = "canonical", force_list_syntax: bool = True) -> WriteProfile:
    """Default write profile for a target dialect."""
    target = canonical_dialect(target)
    strict = target in ("sicstus4", "iso")
    return WriteProfile(
        target=target,
        quote_mode=quote_mode,
        force_list_syntax=force_list_syntax,
        escape_nonascii=strict,
        escape_nonascii_in_quotes=strict,
    )


def _is_nonascii_layout(ch: str) -> bool:
    return ord(ch) > 0x7F and ch.isspace()


def atom_needs_quotes(name: str) -> bool:
    if name in _SOLO_ATOMS:
        return False
    if not name:
        return True
    first = name[0]
    if "a" <= first <= "z":
        return not all(c in _LETTER_DIGIT for c in name)
    if all(c in GRAPHIC_CHARS for c in name):
        return name == "." or "/*" in name or name.startswith("%")
    return True


def escape_text(text: str, quote: str, profile: WriteProfile) -> str:
    out = []
    for ch in text:
        code = ord(ch)
        if ch == quote:
            out.append("\\" + quote)
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif code < 0x20 or code == 0x7F:
            out.append(f"\\x{code:x}\\")
        elif code > 0x7F:
            if _is_nonascii_layout(ch) and profile.escape_nonascii_in_quotes:
                out.append(f"\\{code:o}\\")
            elif profile.escape_nonascii or not ch.isprintable():
                out.append(f"\\x{code:x}\\")
            else:
                out.append(ch)
        else:
            out.append(ch)
    return quote + "".join(out) + quote


def quote_atom(name: str, profile: WriteProfile) -> str:
    if not atom_needs_quotes(name):
        return name
    return escape_text(name, "'", profile)


def format_float(value: float) -> str:
    if math.isnan(value):
        return "1.5NaN"
    if math.isinf(value):
        return "1.0Inf" if value > 0 else "-1.0Inf"
    text = repr(value)
    mantissa, e, exponent = text.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    return mantissa + (e + exponent if e else "")


def _var_namer(t: Term, var_names: Optional[Dict[Var, str]] = None):
    numbering: Dict[Var, str] = {}

    def name(v: Var) -> str:
        if var_names and v in var_names:
            return var_names[v]
        if v not in numbering:
            numbering[v] = f"_G{len(numbering)}"
        return numbering[v]

    return name


def write_canonical(t: Term, profile: Optional[WriteProfile] = None) -> str:
    """Operator-free, fully quoted text that the target dialect reads back."""
    if profile is None:
        profile = write_profile("sicstus4")
    if profile.quote_mode != "canonical":
        raise ValueError("write_canonical needs a canonical write profile")
    var_name = _var_namer(t)
    out = []
    # Explicit stack of pending text fragments and terms keeps deep terms safe.
    stack: list = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        if isinstance(item, Var):
            out.append(var_name(item))
        elif isinstance(item, Int):
            out.append(str(item.value))
        elif isinstance(item, Float):
            out.append(format_float(item.value))
        elif isinstance(item, Atom):
            out.append(quote_atom(item.name, profile))
        elif isinstance(item, Str):
            out.append(escape_text(item.value, '"', profile))
        elif profile.force_list_syntax and _is_any_cons(item):
            elements = []
            node: Term = item
            while _is_any_cons(node):
                elements.append(node.args[0])
                node = node.args[1]
            pending: list = ["["]
            for i, el in enumerate(elements):
                if i:
                    pending.append(",")
                pending.append(el)
            if node != Atom(NIL):
                pending.extend(["|", node])
            pending.append("]")
            stack.extend(reversed(pending))
        else:
            name = item.functor
            functor_text = escape_text(name, "'", profile) if name in ("[]", "{}") else quote_atom(name, profile)
            pending = [functor_text + "("]
            for i, arg in enumerate(item.args):
                if i:
                    pending.append(",")
                pending.append(arg)
            pending.append(")")
            stack.extend(reversed(pending))
    return "".join(out)


def _is_any_cons(t: Term) -> bool:
    return isinstance(t, Compound) and len(t.args) == 2 and t.functor in LIST_FUNCTORS


class OperatorWriter:
    """Operator-aware writer used for ``print`` output and generated code."""

    def __init__(
        self,
        ops: OperatorTable,
        quoted: bool,
        profile: WriteProfile,
        var_names: Optional[Dict[Var, str]] = None,
        spacing: str = "compact",
    ):
        self.ops = ops
        self.quoted = quoted
        self.profile = profile
        self.var_names = var_names
        self.spacing = spacing
        self.var_name = None

    def atom(self, name: str) -> str:
        return quote_atom(name, self.profile) if self.quoted else name

    def write(self, t: Term) -> str:
        self.var_name = _var_namer(t, self.var_names)
        return self.w(t, 1200)

    def w(self, t: Term, max_prec: int) -> str:
        if isinstance(t, Var):
            return self.var_name(t)
        if isinstance(t, Int):
            return str(t.value)
        if isinstance(t, Float):
            return format_float(t.value)
        if isinstance(t, Atom):
            text = self.atom(t.name)
            op_prec = max(
                (d.priority for d in (self.ops.prefix(t.name), self.ops.infix(t.name), self.ops.postfix(t.name)) if d),
                default=0,
            )
            if op_prec > max_prec:
                return f"({text})"
            return text
        if isinstance(t, Str):
            return escape_text(t.value, '"', self.profile) if self.quoted else t.value
        return self.compound(t, max_prec)

    def args_sep(self) -> str:
        return ", " if self.spacing == "standard" else ","

    def compound(self, t: Compound, max_prec: int) -> str:
        name, args = t.functor, t.args
        if _is_any_cons(t):
            elements = []
            node: Term = t
            while _is_any_cons(node):
                elements.append(self.w(node.args[0], 999))
                node = node.args[1]
            body = self.args_sep().join(elements)
            if node != Atom(NIL):
                body += "|" + self.w(node, 999)
            return f"[{body}]"
        if name == "{}" and len(args) == 1:
            return "{" + self.w(args[0], 1200) + "}"
        if len(args) == 2:
            op = self.ops.infix(name)
            if op is not None:
                p = op.priority
                lp = p - 1 if op.type in ("xfx", "xfy") else p
                rp = p - 1 if op.type in ("xfx", "yfx") else p
                left = self.w(args[0], lp)
                right = self.w(args[1], rp)
                text = self.join_infix(left, name if name == "," else self.atom(name), right)
                return f"({text})" if p > max_prec else text
        if len(args) == 1:
            op = self.ops.prefix(name)
            if op is not None and name not in ("-", "+") or (
                op is not None and not isinstance(args[0], (Int, Float))
            ):
                p = op.priority
                ap = p - 1 if op.type == "fx" else p
                operand = self.w(args[0], ap)
                op_text = self.atom(name)
                if _glues(op_text, operand) or operand.startswith("("):
                    text = f"{op_text} {operand}"
                else:
                    text = op_text + operand
                return f"({text})" if p > max_prec else text
            op = self.ops.postfix(name)
            if op is not None:
                p = op.priority
                ap = p - 1 if op.type == "xf" else p
                operand = self.w(args[0], ap)
                text = operand + self.atom(name)
                return f"({text})" if p > max_prec else text
        functor = self.atom(name)
        inner = self.args_sep().join(self.w(a, 999) for a in args)
        return f"{functor}({inner})"

    def join_infix(self, left: str, op: str, right: str) -> str:
        if op == ",":
            return f"{left}, {right}" if self.spacing == "standard" else f"{left},{right}"
        if op[0].isalpha() or self.spacing == "standard" and op in (":-", "-->", "->", ";", "=", "is"):
            return f"{left} {op} {right}"
        lsep = " " if _glues(left, op) else ""
        rsep = " " if _glues(op, right) else ""
        return f"{left}{lsep}{op}{rsep}{right}"


def _char_class(ch: str) -> str:
    if ch in GRAPHIC_CHARS:
        return "graphic"
    if ch.isalnum() or ch == "_":
        return "alnum"
    return "other"


def _glues(left: str, right: str) -> bool:
    """Would writing ``left`` directly before ``right`` merge two tokens?"""
    if not left or not right:
        return False
    a, b = _char_class(left[-1]), _char_class(right[0])
    if a == b and a != "other":
        return True
    # "1.e" style or a number running into a quoted atom is harmless; a
    # trailing ',' never glues.
    return False


def print_text(t: Term, profile: Optional[WriteProfile] = None) -> str:
    """Human-readable output: operators, no quoting or escaping."""
    if profile is None:
        profile = write_profile("sicstus4", "print")
    ops = get_profile(profile.target).operator_table()
    return OperatorWriter(ops, quoted=False, profile=profile).write(t)


def writeq(
    t: Term,
    target: str = "sicstus4",
    var_names: Optional[Dict[Var, str]] = None,
    spacing: str = "compact",
    ops: Optional[OperatorTable] = None,
) -> str:
    """Quoted, operator-aware output suitable for generated source code."""
    profile = write_profile(target)
    if ops is None:
        ops = get_profile(profile.target).operator_table()
    return OperatorWriter(ops, quoted=True, profile=profile, var_names=var_names, spacing=spacing).write(t)
