"""Regenerate the golden sidecar files of the fixture corpus.

Run after a deliberate behavior change, review ``git diff corpus/`` and
commit the result.  Tests compare against these frozen files.

    python3 scripts/freeze_corpus.py [--check]
"""

import argparse
import json
import sys
from pathlib import Path

from plport.corpus import corpus_dir, fixture_hashes, fixture_patch, fixture_report, load_corpus

HASH_FIXTURES = {"hash_terms"}


def expected_files(case):
    base = Path(str(case.path.with_suffix("")))
    out = {}
    if case.name in HASH_FIXTURES:
        out[f"{base}.expected.hashes"] = "\n".join(fixture_hashes(case)) + "\n"
        return out
    report = fixture_report(case)
    out[f"{base}.expected.json"] = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    _, diff = fixture_patch(case)
    if diff:
        out[f"{base}.expected.diff"] = diff
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="only report out-of-date files")
    args = ap.parse_args(argv)
    stale = 0
    for case in load_corpus(corpus_dir()):
        for path, text in expected_files(case).items():
            p = Path(path)
            current = p.read_text(encoding="utf-8") if p.exists() else None
            if current == text:
                continue
            stale += 1
            print(("stale: " if args.check else "wrote: ") + p.name)
            if not args.check:
                p.write_text(text, encoding="utf-8")
    return 1 if args.check and stale else 0


if __name__ == "__main__":
    sys.exit(main())
