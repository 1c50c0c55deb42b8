"""Translate command lines between the SICStus and SWI-Prolog launchers.

Translation table (both directions):

==========================  ==========================
sicstus4                    swi8
==========================  ==========================
``-l FILE``                 ``-l FILE``
``--goal "G."``             ``-g G``
``-Dname=value``            ``PLPORT_SYSPROP_name=value`` (environment
                            assignment written before the command word)
``-a ARGS...``              ``-- ARGS...``
==========================  ==========================

SWI has no system properties, so ``-D`` settings become environment
variables named ``PLPORT_SYSPROP_<name>``; programs read them with
``getenv/2``.  Program arguments always come last.  Flags not in the table
are passed through unchanged with a warning.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from typing import List, Sequence

from plport.errors import UsageError
from plport.profiles import canonical_dialect

ENV_PREFIX = "PLPORT_SYSPROP_"
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_ENV_RE = re.compile(re.escape(ENV_PREFIX) + r"([A-Za-z_][A-Za-z0-9_.]*)=(.*)\Z", re.S)


@dataclass
class Translation:
    env: List[str] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    args: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def argv(self) -> List[str]:
        return self.env + self.flags + self.args

    def text(self) -> str:
        # Quote only the value of an assignment so the shell still sees NAME=...
        words = []
        for e in self.env:
            name, _, value = e.partition("=")
            words.append(f"{name}={shlex.quote(value)}")
        return " ".join(words + [shlex.quote(w) for w in self.flags + self.args])


def _need_value(argv: Sequence[str], i: int, flag: str) -> str:
    if i + 1 >= len(argv):
        raise UsageError(f"{flag} needs an argument")
    return argv[i + 1]


def _from_sicstus(argv: Sequence[str]) -> Translation:
    out = Translation()
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "-a":
            out.args = ["--"] + list(argv[i + 1:])
            break
        if a == "-l":
            out.flags += ["-l", _need_value(argv, i, a)]
            i += 2
            continue
        if a == "--goal" or a.startswith("--goal="):
            if a == "--goal":
                goal, i = _need_value(argv, i, a), i + 2
            else:
                goal, i = a[len("--goal="):], i + 1
            goal = goal.rstrip()
            if goal.endswith("."):
                goal = goal[:-1]
            out.flags += ["-g", goal]
            continue
        if a.startswith("-D"):
            name, eq, value = a[2:].partition("=")
            if not eq or not _NAME_RE.match(name):
                raise UsageError(f"malformed -D setting {a!r}: expected -Dname=value")
            out.env.append(f"{ENV_PREFIX}{name}={value}")
            i += 1
            continue
        out.warnings.append(f"no translation for {a!r}; passed through unchanged")
        out.flags.append(a)
        i += 1
    return out


def _from_swi(argv: Sequence[str]) -> Translation:
    out = Translation()
    i = 0
    # Leading environment assignments produced by the forward translation.
    while i < len(argv):
        m = _ENV_RE.match(argv[i])
        if not m:
            break
        out.flags.append(f"-D{m.group(1)}={m.group(2)}")
        i += 1
    while i < len(argv):
        a = argv[i]
        if a == "--":
            out.args = ["-a"] + list(argv[i + 1:])
            break
        if a == "-l":
            out.flags += ["-l", _need_value(argv, i, a)]
            i += 2
            continue
        if a == "-g":
            goal = _need_value(argv, i, a).rstrip()
            out.flags += ["--goal", goal if goal.endswith(".") else goal + "."]
            i += 2
            continue
        out.warnings.append(f"no translation for {a!r}; passed through unchanged")
        out.flags.append(a)
        i += 1
    return out


def translate_invocation(source: str, target: str, argv: Sequence[str]) -> Translation:
    """Translate launcher arguments from ``source`` to ``target`` conventions."""
    source, target = canonical_dialect(source), canonical_dialect(target)
    if source == target:
        raise UsageError("source and target dialect are the same")
    if (source, target) == ("sicstus4", "swi8"):
        return _from_sicstus(argv)
    if (source, target) == ("swi8", "sicstus4"):
        return _from_swi(argv)
    raise UsageError(f"no invocation table from {source} to {target}")
