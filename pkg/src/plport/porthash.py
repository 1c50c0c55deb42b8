"""Portable term hashing.

Terms are first serialized to a dialect-independent byte string and then
hashed with 64-bit FNV-1a.  Cons cells of either list functor share one tag,
so a list read by one dialect hashes exactly like the same list read by the
other.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Dict, Optional

from plport.errors import NonGroundTerm
from plport.terms import LIST_FUNCTORS, NIL, Atom, Compound, Float, Int, Str, Term, Var

TAG_ATOM = 0x01
TAG_INT = 0x02
TAG_FLOAT = 0x03
TAG_STR = 0x04
TAG_VAR = 0x05
TAG_COMPOUND = 0x06
TAG_NIL = 0x07
TAG_LIST = 0x08
TAG_TRUNCATED = 0x09

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class HashOptions:
    """``depth`` is None for unlimited, else the number of levels hashed
    (the root is level 1).  ``on_variable`` is ``number_by_occurrence`` or
    ``reject``."""

    depth: Optional[int] = None
    on_variable: str = "number_by_occurrence"

    def __post_init__(self) -> None:
        if self.depth is not None and self.depth < 1:
            raise ValueError("depth limit must be >= 1")
        if self.on_variable not in ("number_by_occurrence", "reject"):
            raise ValueError(f"bad on_variable {self.on_variable!r}")


def _u32(n: int) -> bytes:
    return n.to_bytes(4, "big")


def _text(s: str) -> bytes:
    data = s.encode("utf-8")
    return _u32(len(data)) + data


def serialize_canonical(t: Term, options: Optional[HashOptions] = None) -> bytes:
    options = options or HashOptions()
    limit = options.depth
    out = bytearray()
    numbering: Dict[Var, int] = {}
    stack = [(t, 1)]
    while stack:
        node, depth = stack.pop()
        if limit is not None and depth > limit:
            out.append(TAG_TRUNCATED)
            continue
        if isinstance(node, Var):
            if options.on_variable == "reject":
                raise NonGroundTerm(f"variable {node.name} in term")
            if node not in numbering:
                numbering[node] = len(numbering)
            out.append(TAG_VAR)
            out += _u32(numbering[node])
        elif isinstance(node, Atom):
            if node.name == NIL:
                out.append(TAG_NIL)
            else:
                out.append(TAG_ATOM)
                out += _text(node.name)
        elif isinstance(node, Int):
            v = node.value
            mag = abs(v)
            raw = mag.to_bytes((mag.bit_length() + 7) // 8, "big")
            out.append(TAG_INT)
            out.append(1 if v < 0 else 0)
            out += _u32(len(raw)) + raw
        elif isinstance(node, Float):
            out.append(TAG_FLOAT)
            out += struct.pack(">d", node.value)
        elif isinstance(node, Str):
            out.append(TAG_STR)
            out += _text(node.value)
        elif isinstance(node, Compound):
            if node.functor in LIST_FUNCTORS and len(node.args) == 2:
                out.append(TAG_LIST)
            else:
                out.append(TAG_COMPOUND)
                out += _u32(len(node.args))
                out += _text(node.functor)
            for arg in reversed(node.args):
                stack.append((arg, depth + 1))
        else:
            raise TypeError(f"not a term: {node!r}")
    return bytes(out)


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK
    return h


def term_hash(t: Term, options: Optional[HashOptions] = None) -> int:
    return fnv1a64(serialize_canonical(t, options))


def hash_hex(value: int) -> str:
    return f"{value:016x}"
