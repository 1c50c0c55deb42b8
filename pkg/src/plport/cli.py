"""``plport`` command line: lint, fix, hash, canon and translate.

Exit codes: 0 clean, 1 findings, 2 parse error, 3 usage error.
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from plport.analyzer import analyze, emit_json, fix_source
from plport.dialect_db import Catalog, DialectVersion, load_catalog
from plport.errors import (
    NonGroundTerm,
    OverlappingFixes,
    PlportError,
    SchemaError,
    SourceError,
    StaleSpan,
    UsageError,
)
from plport.invocation import ENV_PREFIX, translate_invocation
from plport.porthash import HashOptions, hash_hex, term_hash
from plport.profiles import canonical_dialect, get_profile
from plport.reader import decode_source, read_program, read_terms
from plport.rewriter import unified_diff
from plport.writer import print_text, write_canonical, write_profile

log = logging.getLogger("plport")

EXIT_OK, EXIT_FINDINGS, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3
CONFIG_FILE = "plport.json"
CONFIG_ENV = "PLPORT_CONFIG"


@dataclass
class RunConfig:
    targets: List[str] = field(default_factory=lambda: ["sicstus4", "swi8"])
    source_dialect: str = "sicstus4"
    format: str = "text"
    extensions: List[str] = field(default_factory=list)
    shim_dir: str = "shims"
    core_only: bool = False
    # Glob patterns of files skipped under core_only.
    core_exclude: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.targets:
            raise UsageError("at least one target dialect is required")
        if self.format not in ("text", "json"):
            raise UsageError(f"bad output format {self.format!r}")
        try:
            self.source_dialect = canonical_dialect(self.source_dialect)
            for t in self.targets:
                DialectVersion.parse(t)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def skips(self, path: str) -> bool:
        return self.core_only and any(fnmatch.fnmatch(path, pat) for pat in self.core_exclude)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_file_settings() -> dict:
    path = os.environ.get(CONFIG_ENV) or (CONFIG_FILE if os.path.exists(CONFIG_FILE) else None)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read configuration {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"configuration {path} must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown configuration keys in {path}: {', '.join(sorted(unknown))}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    settings = _config_file_settings()
    if args.target:
        settings["targets"] = [t for part in args.target for t in part.split(",") if t]
    if args.source_dialect:
        settings["source_dialect"] = args.source_dialect
    if args.format:
        settings["format"] = args.format
    if args.db:
        settings["extensions"] = list(settings.get("extensions", [])) + args.db
    if args.shim_dir:
        settings["shim_dir"] = args.shim_dir
    if args.core_only:
        settings["core_only"] = True
    return RunConfig(**settings)


def _catalog(config: RunConfig) -> Catalog:
    try:
        return load_catalog(config.extensions)
    except OSError as exc:
        raise UsageError(f"cannot read catalog extension: {exc}") from None


def _read_source(path: str) -> str:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    text, notice = decode_source(data)
    if notice:
        log.warning("%s: %s", path, notice)
    return text


def _report_source_error(exc: SourceError) -> None:
    print(str(exc), file=sys.stderr)


def lint_files(files: Sequence[str], config: RunConfig, db: Catalog, strategy: str = "conditional"):
    """Parse and analyze ``files``; returns (results, parse_failed).

    ``results`` is a list of (path, text, model, diagnostics).  Operators are
    global in SICStus, so for that source dialect the operator table carries
    over from one file to the next.
    """
    profile = get_profile(config.source_dialect)
    shared_ops = profile.operator_table() if profile.operator_scope == "global" else None
    results = []
    failed = False
    for path in files:
        if config.skips(path):
            log.info("skipping %s (core_only)", path)
            continue
        text = _read_source(path)
        try:
            model = read_program(text, profile, path, shared_ops)
        except SourceError as exc:
            _report_source_error(exc)
            failed = True
            continue
        diags = analyze(model, config.targets, db, config.source_dialect, config.shim_dir, strategy)
        results.append((path, text, model, diags))
    return results, failed


def cmd_lint(files: Sequence[str], config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    db = _catalog(config)
    results, failed = lint_files(files, config, db)
    diags = [d for *_, ds in results for d in ds]
    if config.format == "json":
        out.write(emit_json(diags) + "\n")
    else:
        for d in diags:
            out.write(d.text_line() + "\n")
    if failed:
        return EXIT_PARSE
    return EXIT_FINDINGS if diags else EXIT_OK


def cmd_fix(files: Sequence[str], config: RunConfig, strategy: str = "conditional", mode: str = "diff",
            out=None) -> int:
    out = out or sys.stdout
    db = _catalog(config)
    results, failed = lint_files(files, config, db, strategy)
    any_findings = False
    for path, text, _model, diags in results:
        if not diags:
            continue
        any_findings = True
        try:
            patched, kept, dropped = fix_source(text, diags)
        except (StaleSpan, OverlappingFixes) as exc:
            print(f"{path}: not fixed: {exc}", file=sys.stderr)
            failed = True
            continue
        for p in dropped:
            print(f"{path}: skipped overlapping fix at line {p.target_span.start_line} ({p.kind})", file=sys.stderr)
        new_files = []
        for p in kept:
            new_files.extend(f for f in p.new_files if f not in new_files)
        if mode == "diff":
            if patched != text:
                out.write(unified_diff(text, patched, path))
            for fpath, ftext in new_files:
                if not os.path.exists(fpath):
                    out.write(unified_diff("", ftext, fpath, old_label="/dev/null"))
            continue
        # in_place: write everything only once the patch was computed.
        try:
            for fpath, ftext in new_files:
                if not os.path.exists(fpath):
                    os.makedirs(os.path.dirname(fpath) or ".", exist_ok=True)
                    Path(fpath).write_text(ftext, encoding="utf-8")
            if patched != text:
                Path(path).write_text(patched, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write fix for {path}: {exc}") from None
    if failed:
        return EXIT_PARSE
    return EXIT_FINDINGS if any_findings else EXIT_OK


def _read_term_file(path: str, profile: str):
    text = _read_source(path)
    return read_terms(text, canonical_dialect(profile), file=path)


def cmd_hash(term_file: str, profile: str = "sicstus4", ground_only: bool = False, depth: Optional[int] = None,
             out=None) -> int:
    out = out or sys.stdout
    try:
        terms = _read_term_file(term_file, profile)
    except SourceError as exc:
        _report_source_error(exc)
        return EXIT_PARSE
    opts = HashOptions(depth=depth, on_variable="reject" if ground_only else "number_by_occurrence")
    lines = []
    for term, _, span in terms:
        try:
            lines.append(hash_hex(term_hash(term, opts)))
        except NonGroundTerm as exc:
            print(f"{span.file}:{span.start_line}:{span.start_col}: {exc}", file=sys.stderr)
            return EXIT_FINDINGS
    for line in lines:
        out.write(line + "\n")
    return EXIT_OK


def cmd_canon(term_file: str, profile: str = "sicstus4", mode: str = "canonical", target: Optional[str] = None,
              out=None) -> int:
    out = out or sys.stdout
    try:
        terms = _read_term_file(term_file, profile)
    except SourceError as exc:
        _report_source_error(exc)
        return EXIT_PARSE
    wp = write_profile(target or profile, "canonical" if mode == "canonical" else "print")
    for term, _, _ in terms:
        if mode == "canonical":
            out.write(write_canonical(term, wp) + ".\n")
        else:
            out.write(print_text(term, wp) + "\n")
    return EXIT_OK


def cmd_translate(source: str, target: str, argv: Sequence[str], out=None) -> int:
    out = out or sys.stdout
    result = translate_invocation(source, target, list(argv))
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    text = result.text()
    if text:
        out.write(text + "\n")
    return EXIT_OK


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--target", action="append", metavar="D[,D]",
                   help="target dialect(s), e.g. sicstus4,swi8 or swi8@9.1.0 (default: both)")
    g.add_argument("--source-dialect", metavar="D", help="dialect the code is written for (default: sicstus4)")
    g.add_argument("--format", choices=["text", "json"], help="report format (default: text)")
    g.add_argument("--db", action="append", metavar="FILE", help="catalog extension file (repeatable)")
    g.add_argument("--shim-dir", metavar="DIR", help="where generated shim modules go (default: shims)")
    g.add_argument("--core-only", action="store_true", help="skip files matched by core_exclude in the config")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = _Parser(
        prog="plport",
        description="Portability checker and fixer for SICStus 4 / SWI-Prolog 8 sources.",
        epilog=f"Configuration: ./{CONFIG_FILE} or the file named by ${CONFIG_ENV}; flags override it.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("lint", parents=[common], help="report portability problems")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("fix", parents=[common], help="apply or show the available fixes")
    p.add_argument("files", nargs="+")
    p.add_argument("--strategy", choices=["conditional", "shim"], default="conditional",
                   help="inline compatibility code in if/else blocks, or emit separate shim modules")
    p.add_argument("--mode", choices=["in_place", "diff"], default="diff",
                   help="diff prints unified diffs and writes nothing (default)")

    p = sub.add_parser("hash", parents=[common], help="portable hash of each term in a file")
    p.add_argument("term_file")
    p.add_argument("--profile", default="sicstus4", help="syntax used to read the file")
    p.add_argument("--ground-only", action="store_true", help="fail (exit 1) on terms with variables")
    p.add_argument("--depth", type=int, help="hash only down to this depth (root is 1)")

    p = sub.add_parser("canon", parents=[common], help="write each term canonically or for display")
    p.add_argument("term_file")
    p.add_argument("--profile", default="sicstus4", help="syntax used to read the file")
    p.add_argument("--mode", choices=["canonical", "print"], default="canonical")
    p.add_argument("--write-target", help="dialect to write for (default: the --profile dialect)")

    p = sub.add_parser(
        "translate",
        parents=[common],
        help="translate launcher arguments between dialects",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=(
            "Table:  -l F <-> -l F;  --goal 'G.' <-> -g G;  -a ARGS <-> -- ARGS;\n"
            f"        -Dname=value -> {ENV_PREFIX}name=value (environment assignment, printed first).\n"
            "Unknown flags pass through with a warning."
        ),
    )
    p.add_argument("--from", dest="from_dialect", required=True)
    p.add_argument("--to", dest="to_dialect", required=True)
    p.add_argument("argv", nargs=argparse.REMAINDER, help="launcher arguments (put them after --)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="plport: %(levelname)s: %(message)s")
    try:
        if args.command == "translate":
            rest = list(args.argv)
            if rest and rest[0] == "--":
                rest = rest[1:]
            return cmd_translate(args.from_dialect, args.to_dialect, rest)
        if args.command == "hash":
            if args.depth is not None and args.depth < 1:
                raise UsageError("--depth must be at least 1")
            return cmd_hash(args.term_file, args.profile, args.ground_only, args.depth)
        if args.command == "canon":
            return cmd_canon(args.term_file, args.profile, args.mode, args.write_target)
        config = build_config(args)
        if args.command == "lint":
            return cmd_lint(args.files, config)
        return cmd_fix(args.files, config, args.strategy, args.mode)
    except UsageError as exc:
        print(f"plport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Bad dialect names and similar argument problems.
        print(f"plport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"plport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PlportError as exc:
        print(f"plport: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
