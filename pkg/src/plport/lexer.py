"""Prolog tokenizer with per-dialect character policies."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import List, Optional, Tuple

from plport.errors import LexError
from plport.terms import SourceSpan

GRAPHIC_CHARS = frozenset("#$&*+-./:<=>?@^~\\")
PUNCT = {
    "(": "open",
    ")": "close",
    "[": "open_list",
    "]": "close_list",
    "{": "open_curly",
    "}": "close_curly",
    ",": "comma",
    "|": "bar",
}
SOLO = frozenset("!;")

_SIMPLE_ESCAPES = {
    "a": "\a",
    "b": "\b",
    "f": "\f",
    "n": "\n",
    "r": "\r",
    "t": "\t",
    "v": "\v",
    "e": "\x1b",
    "s": " ",
    "0": "\0",
    "\\": "\\",
    "'": "'",
    '"': '"',
    "`": "`",
}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    span: SourceSpan
    start: int
    end: int
    layout_before: bool = False
    quoted: bool = False

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r})"


@dataclass(frozen=True)
class SyntaxNote:
    """A use of a lexical construct that only some dialects accept."""

    feature: str
    span: SourceSpan
    detail: str = ""
    name: str = ""
    origin: str = ""


class LineIndex:
    """Converts character offsets to 1-based (line, column)."""

    def __init__(self, text: str, file: str = "<string>"):
        self.text = text
        self.file = file
        self.starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.starts.append(i + 1)

    def position(self, offset: int) -> Tuple[int, int]:
        line = bisect.bisect_right(self.starts, offset) - 1
        return line + 1, offset - self.starts[line] + 1

    def offset(self, line: int, col: int) -> int:
        return self.starts[line - 1] + col - 1

    def span(self, start: int, end: int) -> SourceSpan:
        sl, sc = self.position(start)
        el, ec = self.position(end)
        return SourceSpan(self.file, sl, sc, el, ec)


def is_layout(ch: str) -> bool:
    return ch.isspace()


def is_alnum(ch: str) -> bool:
    return ch == "_" or ch.isalnum()


def is_var_start(ch: str) -> bool:
    return ch == "_" or ch.isupper() or ch.istitle()


def is_name_start(ch: str) -> bool:
    return ch.isalpha() and not is_var_start(ch)


def is_graphic(ch: str) -> bool:
    if ch in GRAPHIC_CHARS:
        return True
    # Non-ASCII symbols and punctuation behave like graphic characters.
    return ord(ch) > 0x7F and not ch.isspace() and not is_alnum(ch) and ch.isprintable()


class Lexer:
    def __init__(self, text: str, profile, file: str = "<string>"):
        self.text = text
        self.profile = profile
        self.index = LineIndex(text, file)
        self.pos = 0
        self.notes: List[SyntaxNote] = []
        self.comments: List[Tuple[int, int]] = []

    # -- helpers -----------------------------------------------------------

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def error(self, start: int, reason: str, end: Optional[int] = None) -> LexError:
        end = start + 1 if end is None else end
        end = min(max(end, start), len(self.text))
        return LexError(self.index.span(start, end), reason)

    def note(self, feature: str, start: int, end: int, detail: str = "") -> None:
        self.notes.append(SyntaxNote(feature, self.index.span(start, end), detail))

    def check_unquoted(self, start: int, end: int) -> None:
        for i in range(start, end):
            ch = self.text[i]
            if ord(ch) > 0xFF:
                if not self.profile.accepts("unicode_unquoted"):
                    raise self.error(
                        i, f"character U+{ord(ch):04X} outside quotes is not ISO 8859-1"
                    )
                self.note("unicode_unquoted", start, end, ch)
                return

    # -- layout ------------------------------------------------------------

    def skip_layout(self) -> bool:
        """Skip whitespace and comments; return True if anything was skipped."""
        start = self.pos
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if is_layout(ch):
                self.pos += 1
            elif ch == "%":
                end = text.find("\n", self.pos)
                end = len(text) if end < 0 else end
                self.comments.append((self.pos, end))
                self.pos = end
            elif ch == "/" and self.peek(1) == "*":
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error(self.pos, "unterminated block comment", self.pos + 2)
                self.comments.append((self.pos, end + 2))
                self.pos = end + 2
            else:
                break
        return self.pos > start

    # -- main loop ---------------------------------------------------------

    def tokens(self) -> List[Token]:
        out = []
        while True:
            layout = self.skip_layout()
            if self.pos >= len(self.text):
                return out
            out.append(self.next_token(layout or not out))

    def make(self, kind, value, start, layout, quoted=False) -> Token:
        return Token(kind, value, self.index.span(start, self.pos), start, self.pos, layout, quoted)

    def next_token(self, layout: bool) -> Token:
        text = self.text
        start = self.pos
        ch = text[start]

        if ch.isdigit() and ch.isascii():
            kind, value = self.read_number()
            return self.make(kind, value, start, layout)
        if is_var_start(ch):
            self.pos += 1
            while self.pos < len(text) and is_alnum(text[self.pos]):
                self.pos += 1
            self.check_unquoted(start, self.pos)
            return self.make("var", text[start:self.pos], start, layout)
        if is_name_start(ch):
            self.pos += 1
            while self.pos < len(text) and is_alnum(text[self.pos]):
                self.pos += 1
            self.check_unquoted(start, self.pos)
            return self.make("name", text[start:self.pos], start, layout)
        if ch == "'":
            value = self.read_quoted("'")
            return self.make("name", value, start, layout, quoted=True)
        if ch == '"':
            value = self.read_quoted('"')
            return self.make("string", value, start, layout)
        if ch == "`":
            value = self.read_quoted("`")
            return self.make("backquote", value, start, layout)
        if ch in PUNCT:
            self.pos += 1
            return self.make(PUNCT[ch], ch, start, layout)
        if ch in SOLO:
            self.pos += 1
            return self.make("name", ch, start, layout)
        if ch == "." and (start + 1 >= len(text) or is_layout(text[start + 1]) or text[start + 1] == "%"):
            self.pos += 1
            return self.make("end", ".", start, layout)
        if is_graphic(ch):
            self.pos += 1
            while self.pos < len(text) and is_graphic(text[self.pos]):
                if text[self.pos] == "/" and self.peek(1) == "*":
                    break
                self.pos += 1
            self.check_unquoted(start, self.pos)
            return self.make("name", text[start:self.pos], start, layout)
        if ord(ch) > 0xFF and not self.profile.accepts("unicode_unquoted"):
            raise self.error(start, f"character U+{ord(ch):04X} outside quotes is not ISO 8859-1")
        raise self.error(start, f"unexpected character {ch!r}")

    # -- numbers -----------------------------------------------------------

    def digits(self, valid) -> str:
        """Read a digit run, allowing ``_`` digit groups where the dialect does."""
        text = self.text
        start = self.pos
        out = []
        while self.pos < len(text):
            ch = text[self.pos]
            if valid(ch):
                out.append(ch)
                self.pos += 1
            elif (
                ch == "_"
                and out
                and self.pos + 1 < len(text)
                and valid(text[self.pos + 1])
                and self.profile.accepts("digit_groups")
            ):
                self.note("digit_groups", start, self.pos + 2)
                self.pos += 1
            else:
                break
        return "".join(out)

    def read_number(self) -> Tuple[str, object]:
        text = self.text
        start = self.pos
        if text[start] == "0" and self.peek(1) == "'":
            self.pos += 2
            return "int", self.read_char_code(start)
        if text[start] == "0" and self.peek(1) in ("x", "o", "b"):
            base = {"x": 16, "o": 8, "b": 2}[self.peek(1)]
            save = self.pos
            self.pos += 2
            ds = self.digits(lambda c: _digit_value(c) < base)
            if ds:
                return "int", int(ds, base)
            self.pos = save
        ds = self.digits(lambda c: c.isascii() and c.isdigit())
        if self.peek() == "'" and ds and 2 <= int(ds) <= 36:
            base = int(ds)
            save = self.pos
            self.pos += 1
            rd = self.digits(lambda c: _digit_value(c) < base)
            if rd:
                return "int", int(rd, base)
            self.pos = save
        if self.peek() == "." and self.peek(1).isascii() and self.peek(1).isdigit():
            self.pos += 1
            frac = self.digits(lambda c: c.isascii() and c.isdigit())
            literal = f"{ds}.{frac}"
            if self.peek() in ("e", "E"):
                save = self.pos
                self.pos += 1
                sign = ""
                if self.peek() in ("+", "-"):
                    sign = self.peek()
                    self.pos += 1
                exp = self.digits(lambda c: c.isascii() and c.isdigit())
                if exp:
                    literal += f"e{sign}{exp}"
                else:
                    self.pos = save
            if text.startswith("Inf", self.pos):
                self.pos += 3
                return "float", float("inf")
            if text.startswith("NaN", self.pos):
                self.pos += 3
                return "float", float("nan")
            return "float", float(literal)
        return "int", int(ds)

    def read_char_code(self, start: int) -> int:
        text = self.text
        if self.pos >= len(text):
            raise self.error(start, "incomplete character code literal", self.pos)
        ch = text[self.pos]
        if ch == "\\":
            if self.peek(1) == "\n":
                raise self.error(start, "invalid character code literal", self.pos + 1)
            value = self.read_escape(start)
            return ord(value)
        if ch == "'":
            # 0''' (ISO) and 0'' (accepted by both dialects) denote the quote.
            self.pos += 2 if self.peek(1) == "'" else 1
            return 39
        self.pos += 1
        return ord(ch)

    # -- quoted items --------------------------------------------------------

    def read_escape(self, start: int) -> str:
        """Read an escape sequence at ``self.pos`` (which is a backslash)."""
        text = self.text
        esc_start = self.pos
        self.pos += 1
        if self.pos >= len(text):
            raise self.error(start, "unterminated escape sequence", self.pos)
        ch = text[self.pos]
        if ch in "01234567":
            j = self.pos
            while j < len(text) and text[j] in "01234567":
                j += 1
            value = int(text[self.pos:j], 8)
            self.pos = j
            if self.peek() == "\\":
                self.pos += 1
            return self.code_point(value, esc_start)
        if ch == "x":
            j = self.pos + 1
            while j < len(text) and _digit_value(text[j]) < 16:
                j += 1
            if j == self.pos + 1:
                raise self.error(esc_start, "bad \\x escape", j)
            value = int(text[self.pos + 1:j], 16)
            self.pos = j
            if self.peek() == "\\":
                self.pos += 1
            return self.code_point(value, esc_start)
        if ch in ("u", "U"):
            n = 4 if ch == "u" else 8
            digits = text[self.pos + 1:self.pos + 1 + n]
            if len(digits) != n or any(_digit_value(c) >= 16 for c in digits):
                raise self.error(esc_start, f"bad \\{ch} escape", self.pos + 1)
            self.pos += 1 + n
            return self.code_point(int(digits, 16), esc_start)
        if ch in _SIMPLE_ESCAPES:
            self.pos += 1
            return _SIMPLE_ESCAPES[ch]
        raise self.error(esc_start, f"undefined escape sequence \\{ch}", self.pos + 1)

    def code_point(self, value: int, at: int) -> str:
        if value > 0x10FFFF or 0xD800 <= value <= 0xDFFF:
            raise self.error(at, f"invalid character code {value}", self.pos)
        return chr(value)

    def read_quoted(self, quote: str) -> str:
        text = self.text
        start = self.pos
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(text):
                raise self.error(start, f"unterminated quoted item ({quote})", self.pos)
            ch = text[self.pos]
            if ch == quote:
                if self.peek(1) == quote:
                    out.append(quote)
                    self.pos += 2
                    continue
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                if self.peek(1) == "\n":
                    self.pos += 2
                    continue
                out.append(self.read_escape(start))
                continue
            if ord(ch) > 0x7F and ch.isspace():
                if not self.profile.accepts("nonascii_layout_in_quotes"):
                    raise self.error(
                        self.pos, f"unescaped non-ASCII layout character U+{ord(ch):04X} in quoted item"
                    )
                self.note("nonascii_layout_in_quotes", self.pos, self.pos + 1, ch)
            out.append(ch)
            self.pos += 1


def _digit_value(ch: str) -> int:
    if not ch.isascii():
        return 99
    if ch.isdigit():
        return ord(ch) - 48
    if ch.isalpha():
        return ord(ch.lower()) - 87
    return 99


def tokenize(text: str, profile, file: str = "<string>") -> List[Tuple[Token, SourceSpan]]:
    """Tokenize ``text`` and return ``(token, span)`` pairs."""
    return [(tok, tok.span) for tok in Lexer(text, profile, file).tokens()]
