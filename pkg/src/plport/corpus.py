"""Fixture corpus access and the deterministic random-term generator.

The generator is driven by SplitMix64 so any implementation can reproduce
the same corpus:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

(all arithmetic modulo 2**64).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from plport.terms import Atom, Compound, Float, Int, Str, Term, Var, make_list

_MASK = (1 << 64) - 1

# Atom names chosen to exercise quoting and escaping in the writer.
ATOM_POOL = (
    "a", "foo", "bar_baz", "x1", "[]", "{}", "!", ";", ",", "|", "",
    "hello world", "Abc", "_x", "don't", "back\\slash", "tab\there", "new\nline",
    "+", "-", "*", "=..", "->", ":-", ".", "/*", "%", "é", "café",
    "世界", "nb sp", " ", "emoji\U0001F600", "a.b", "1abc", "''",
)
INT_POOL = (0, 1, -1, 7, 42, -42, 255, 2**31 - 1, -(2**31), 2**63, -(2**64) - 3, 10**30)
FLOAT_POOL = (0.0, -0.0, 1.0, -1.5, 3.14159, 1e300, -2.5e-300, 5e-324, 1e22, 0.1,
              math.inf, -math.inf, math.nan)
STR_POOL = ("", "abc", "two words", 'say "hi"', "été", "line\nbreak")
FUNCTOR_POOL = ("f", "g", "point", "+", "-", "foo bar", ",", "[]", "{}", "é", ".", "[|]", "'")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n

    def choice(self, seq):
        return seq[self.below(len(seq))]


def generate_random_term(
    seed: int,
    size_budget: int,
    list_functor: str = ".",
    allow_strings: bool = True,
    allow_vars: bool = True,
) -> Term:
    """Deterministic pseudo-random term using at most ``size_budget`` nodes."""
    if size_budget < 1:
        raise ValueError("size_budget must be >= 1")
    rng = SplitMix64(seed)
    var_pool = [Var(f"V{i}", i) for i in range(4)]

    def leaf() -> Term:
        kinds = ["atom", "int", "float"]
        if allow_strings:
            kinds.append("str")
        if allow_vars:
            kinds.append("var")
        kind = rng.choice(kinds)
        if kind == "atom":
            return Atom(rng.choice(ATOM_POOL))
        if kind == "int":
            if rng.below(2):
                return Int(rng.choice(INT_POOL))
            return Int(rng.next() - (1 << 63))
        if kind == "float":
            if rng.below(2):
                return Float(rng.choice(FLOAT_POOL))
            return Float((rng.next() / (1 << 64) - 0.5) * 10.0 ** (rng.below(40) - 20))
        if kind == "str":
            return Str(rng.choice(STR_POOL))
        return rng.choice(var_pool)

    def gen(budget: int) -> Term:
        if budget <= 1 or rng.below(5) == 0:
            return leaf()
        if budget >= 3 and rng.below(3) == 0:
            # n cons cells and a tail, plus the items themselves
            n = 1 + rng.below(min(4, (budget - 1) // 2))
            parts = split(budget - n - 1, n)
            items = [gen(p) for p in parts]
            tail: Term = Atom("[]")
            if rng.below(4) == 0:
                tail = rng.choice(var_pool) if allow_vars else Atom("tail")
            return make_list(items, tail, list_functor)
        budget -= 1
        arity = 1 + rng.below(min(4, budget))
        parts = split(budget, arity)
        name = rng.choice(FUNCTOR_POOL)
        if name in (".", "[|]") and arity == 2:
            name = "cons"
        return Compound(name, tuple(gen(p) for p in parts))

    def split(total: int, n: int) -> List[int]:
        # Give every part at least one node, spread the rest randomly.
        parts = [1] * n
        for _ in range(total - n):
            parts[rng.below(n)] += 1
        return parts

    return gen(size_budget)


HEADER_RE = re.compile(r"^%\s*plport:\s*(.*)$", re.MULTILINE)


@dataclass
class FixtureCase:
    name: str
    path: Path
    source: str
    source_dialect: str = "sicstus4"
    targets: List[str] = field(default_factory=lambda: ["sicstus4", "swi8"])
    expected_json: Optional[list] = None
    expected_diff: Optional[str] = None
    expected_hashes: Optional[List[str]] = None


def parse_header(text: str) -> dict:
    """Read ``% plport: source=D targets=D1,D2`` settings from a fixture."""
    settings = {}
    m = HEADER_RE.search(text)
    if m:
        for part in m.group(1).split():
            key, _, value = part.partition("=")
            settings[key] = value
    return settings


def corpus_dir() -> Path:
    """The shipped fixture directory (repository ``corpus/``)."""
    here = Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "corpus"
        if candidate.is_dir() and any(candidate.glob("*.pl")):
            return candidate
    raise FileNotFoundError("corpus directory not found")


def load_fixture(path: Path) -> FixtureCase:
    path = Path(path)
    source = path.read_text(encoding="utf-8")
    settings = parse_header(source)
    case = FixtureCase(name=path.stem, path=path, source=source)
    if "source" in settings:
        case.source_dialect = settings["source"]
    if "targets" in settings:
        case.targets = settings["targets"].split(",")
    base = path.with_suffix("")
    exp = Path(str(base) + ".expected.json")
    if exp.exists():
        case.expected_json = json.loads(exp.read_text(encoding="utf-8"))
    diff = Path(str(base) + ".expected.diff")
    if diff.exists():
        case.expected_diff = diff.read_text(encoding="utf-8")
    hashes = Path(str(base) + ".expected.hashes")
    if hashes.exists():
        case.expected_hashes = hashes.read_text(encoding="utf-8").split()
    return case


def load_corpus(directory: Optional[Path] = None) -> List[FixtureCase]:
    directory = Path(directory) if directory else corpus_dir()
    return [load_fixture(p) for p in sorted(directory.glob("*.pl"))]


# -- running fixtures ------------------------------------------------------------


def fixture_model(case: FixtureCase):
    from plport.reader import read_program

    return read_program(case.source, case.source_dialect, case.path.name)


def fixture_diagnostics(case: FixtureCase, db=None, strategy: str = "conditional"):
    """Diagnostics for a fixture, reported against its file name."""
    from plport.analyzer import analyze
    from plport.dialect_db import seed_catalog

    return analyze(fixture_model(case), case.targets, db or seed_catalog(), case.source_dialect,
                   strategy=strategy)


def fixture_report(case: FixtureCase, db=None) -> list:
    return [d.to_json() for d in fixture_diagnostics(case, db)]


def fixture_patch(case: FixtureCase, db=None, strategy: str = "conditional"):
    """(patched text, unified diff) after applying every fix to the fixture."""
    from plport.analyzer import fix_source
    from plport.rewriter import unified_diff

    patched, _, _ = fix_source(case.source, fixture_diagnostics(case, db, strategy))
    return patched, unified_diff(case.source, patched, case.path.name)


def fixture_hashes(case: FixtureCase, profile: Optional[str] = None) -> List[str]:
    from plport.porthash import hash_hex, term_hash
    from plport.reader import read_terms

    terms = read_terms(case.source, profile or case.source_dialect, file=case.path.name)
    return [hash_hex(term_hash(t)) for t, _, _ in terms]
