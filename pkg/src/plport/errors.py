"""Exception hierarchy shared by the reader, catalog, rewriter and hasher."""

from __future__ import annotations

from typing import Optional

from plport.terms import SourceSpan


class PlportError(Exception):
    """Base class for every error raised by this package."""


class SourceError(PlportError):
    """An error tied to a location in a source file."""

    kind = "error"

    def __init__(self, span: Optional[SourceSpan], reason: str):
        self.span = span
        self.reason = reason
        where = f"{span}: " if span is not None else ""
        super().__init__(f"{where}{self.kind}: {reason}")


class LexError(SourceError):
    kind = "syntax error"


class ParseError(SourceError):
    kind = "syntax error"


class UnbalancedConditional(ParseError):
    kind = "unbalanced conditional"


class SchemaError(PlportError):
    def __init__(self, path: str, location: str, reason: str):
        self.path = path
        self.location = location
        self.reason = reason
        super().__init__(f"{path}: {location}: {reason}")


class DuplicateId(SchemaError):
    pass


class NoConditionAvailable(PlportError):
    pass


class MalformedBlockSpec(SourceError):
    kind = "malformed block spec"


class UnknownShim(PlportError):
    pass


class OverlappingFixes(PlportError):
    pass


class StaleSpan(PlportError):
    pass


class NonGroundTerm(PlportError):
    pass


class UsageError(PlportError):
    """Bad command-line input (exit code 3)."""
