"""Acceptance checks.  Each test is tagged with the criterion it covers; the
terminal summary prints one PASS/FAIL line per criterion."""

import json
import os
import random
import subprocess
import sys
import time

import pytest

from oracles import CondGen, all_patterns, block_runs, brute_force_branches, eval_wake, expr_text, fnv1a_ref, Interp
from plport.analyzer import fix_source
from plport.cli import main
from plport.conditions import Activity, select_branches
from plport.corpus import (
    corpus_dir,
    fixture_diagnostics,
    fixture_hashes,
    fixture_report,
    generate_random_term,
    load_corpus,
    load_fixture,
)
from plport.porthash import term_hash
from plport.reader import Clause, CondBlock, read_program, read_term
from plport.rewriter import block_fix, wake_condition
from plport.errors import SourceError
from plport.terms import Atom, Compound, Var, alpha_number, make_list, structural_eq, Int
from plport.writer import write_canonical, write_profile, writeq

PROFILES = ("sicstus4", "swi8")
LIST_FUNCTOR = {"sicstus4": ".", "swi8": "[|]"}


def _fixture(name):
    return load_fixture(corpus_dir() / f"{name}.pl")


# -- 1 ----------------------------------------------------------------------------


@pytest.mark.criterion(1, "round trip of 10,000 generated terms per profile")
def test_round_trip_10000_terms_per_profile():
    start = time.perf_counter()
    failures = []
    for profile in PROFILES:
        wp = write_profile(profile)
        for seed in range(10_000):
            t = generate_random_term(seed, 1 + seed % 40, LIST_FUNCTOR[profile], allow_strings=profile == "swi8")
            text = write_canonical(t, wp)
            back, _, _ = read_term(text, profile)
            if not structural_eq(back, t):
                failures.append((profile, seed, text))
    elapsed = time.perf_counter() - start
    print(f"round trip: {2 * 10_000} terms, {len(failures)} failures, {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed < 30


# -- 2 ----------------------------------------------------------------------------


@pytest.mark.criterion(2, "random-seed listing parses and selects the right branch")
def test_listing_branch_selection(db):
    case = _fixture("random_seed_listing")
    expected = {"sicstus4": [Activity.NO, Activity.YES], "swi8": [Activity.YES, Activity.NO]}
    for profile in PROFILES:
        model = read_program(case.source, profile, "listing.pl")
        blocks = [it for it in model.items if isinstance(it, CondBlock)]
        assert len(blocks) == 1
        cond = blocks[0].branches[0].condition
        ref, _, _ = read_term("predicate_property(set_random(_), _)", profile)
        assert structural_eq(cond, ref)
        assert blocks[0].branches[1].is_else
        for dialect in PROFILES:
            got = [act for _, act in select_branches(blocks[0], dialect, db)]
            assert got == expected[dialect], (profile, dialect, got)


@pytest.mark.criterion(2, "random-seed listing parses and selects the right branch")
def test_listing_has_no_findings(db):
    case = _fixture("random_seed_listing")
    assert fixture_diagnostics(case, db) == []


# -- 3 ----------------------------------------------------------------------------

RULES = [f"P{n:03d}" for n in range(1, 13)]


def _rule_fixture(rule, polarity):
    hits = sorted(corpus_dir().glob(f"{rule.lower()}_*_{polarity}.pl"))
    assert len(hits) == 1, f"expected one {polarity} fixture for {rule}"
    return load_fixture(hits[0])


def _normalized(report):
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)


@pytest.mark.criterion(3, "rule matrix matches golden diagnostics")
@pytest.mark.parametrize("rule", RULES)
def test_rule_matrix(rule, db):
    pos = _rule_fixture(rule, "pos")
    neg = _rule_fixture(rule, "neg")
    assert pos.expected_json is not None and neg.expected_json is not None
    got = fixture_report(pos, db)
    assert _normalized(got) == _normalized(pos.expected_json)
    assert any(d["rule"] == rule for d in got)
    assert fixture_report(neg, db) == [] == neg.expected_json


# -- 4 ----------------------------------------------------------------------------


@pytest.mark.criterion(4, "block translation agrees with the suspension simulator")
def test_merge_block_wake_condition(db):
    case = _fixture("p011_block_pos")
    model = read_program(case.source, "sicstus4", case.path.name)
    directive = model.items[0]
    plan = block_fix(model, directive)
    expected = "when(((nonvar(A1);nonvar(A3)),(nonvar(A2);nonvar(A3))), merge__unblocked(A1, A2, A3))"
    assert expected in plan.replacement

    args = [Var(f"A{i}", i) for i in (1, 2, 3)]
    specs = [read_term("merge(-,?,-)")[0], read_term("merge(?,-,-)")[0]]
    cond = wake_condition(specs, args)
    assert writeq(cond, "sicstus4", {a: a.name for a in args}) == "(nonvar(A1);nonvar(A3)),(nonvar(A2);nonvar(A3))"
    modes = [["-", "?", "-"], ["?", "-", "-"]]
    for pattern in all_patterns(3):
        assert eval_wake(cond, args, pattern) == block_runs(modes, pattern), pattern
    assert case.expected_diff is not None


@pytest.mark.criterion(4, "block translation agrees with the suspension simulator")
def test_random_block_specs_agree_with_simulator():
    rng = random.Random(2024)
    for _ in range(20):
        arity = rng.randint(1, 5)
        modes = [[rng.choice("-?") for _ in range(arity)] for _ in range(rng.randint(1, 3))]
        specs = [Compound("p", tuple(Atom(m) for m in spec)) for spec in modes]
        args = [Var(f"A{i + 1}", i) for i in range(arity)]
        cond = wake_condition(specs, args)
        for pattern in all_patterns(arity):
            assert eval_wake(cond, args, pattern) == block_runs(modes, pattern), (modes, pattern)


@pytest.mark.criterion(4, "block translation agrees with the suspension simulator")
def test_block_translation_preserves_ground_behavior(db):
    case = _fixture("p011_block_pos")
    original = read_program(case.source, "sicstus4", "m.pl")
    patched, _, _ = fix_source(case.source, fixture_diagnostics(case, db))
    translated = read_program(patched, "sicstus4", "m.pl")
    before = Interp([it.term for it in original.walk() if isinstance(it, Clause)])
    after = Interp([it.term for it in translated.walk() if isinstance(it, Clause)])
    lists = [[], [1], [2], [1, 2], [1, 3], [2, 3], [1, 2, 3], [3, 1]]

    def lst(xs):
        return make_list([Int(x) for x in xs])

    for a in lists:
        for b in lists:
            for c in lists + [[1, 1, 2], [1, 2, 2, 3]]:
                goal = Compound("merge", (lst(a), lst(b), lst(c)))
                assert before.succeeds(goal) == after.succeeds(goal), (a, b, c)


# -- 5 ----------------------------------------------------------------------------


@pytest.mark.criterion(5, "portable hash")
def test_hash_fixture_is_profile_independent():
    case = _fixture("hash_terms")
    sicstus = fixture_hashes(case, "sicstus4")
    swi = fixture_hashes(case, "swi8")
    assert len(sicstus) == 50
    assert sicstus == swi == case.expected_hashes


@pytest.mark.criterion(5, "portable hash")
def test_hash_is_stable_across_processes(repo_root):
    path = str(corpus_dir() / "hash_terms.pl")
    outputs = []
    for seed in ("0", "1", "12345"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        proc = subprocess.run([sys.executable, "-m", "plport", "hash", path], capture_output=True, text=True,
                              env=env, cwd=repo_root, check=True)
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].split() == _fixture("hash_terms").expected_hashes


@pytest.mark.criterion(5, "portable hash")
def test_hash_collisions_among_10000_distinct_terms():
    distinct = {}
    seed = 0
    while len(distinct) < 10_000:
        t = generate_random_term(seed, 1 + seed % 30)
        distinct.setdefault(alpha_number(t), t)
        seed += 1
    hashes = [term_hash(t) for t in distinct.values()]
    collisions = len(hashes) - len(set(hashes))
    print(f"hash collisions among {len(hashes)} distinct terms: {collisions}")
    assert collisions <= 1


@pytest.mark.criterion(5, "portable hash")
def test_empty_atom_hash_matches_hand_computed_value(tmp_path, capsys):
    f = tmp_path / "e.pl"
    f.write_text("''.\n")
    assert main(["hash", str(f)]) == 0
    expected = f"{fnv1a_ref(bytes([0x01, 0, 0, 0, 0])):016x}"
    assert expected == "d80d6caea7dc7eec"
    assert capsys.readouterr().out == expected + "\n"


# -- 6 ----------------------------------------------------------------------------


def _parse_errors(text, profile):
    try:
        read_program(text, profile, "x.pl")
        return 0
    except SourceError:
        return 1


@pytest.mark.criterion(6, "every fix re-parses under every target profile")
@pytest.mark.parametrize("strategy", ["conditional", "shim"])
def test_fixes_reparse_under_all_targets(db, strategy):
    start = time.perf_counter()
    applied = 0
    for case in load_corpus():
        if case.expected_hashes is not None:
            continue
        diags = fixture_diagnostics(case, db, strategy)
        plans = []
        for d in diags:
            if d.fix is not None and all(p is not d.fix for p in plans):
                plans.append(d.fix)
        variants = [fix_source(case.source, [d for d in diags if d.fix is p])[0] for p in plans]
        if plans:
            variants.append(fix_source(case.source, diags)[0])
        for patched in variants:
            applied += 1
            for profile in case.targets:
                before = _parse_errors(case.source, profile)
                after = _parse_errors(patched, profile)
                assert after <= before, (case.name, profile)
        for p in plans:
            for _, text in p.new_files:
                for profile in case.targets:
                    assert _parse_errors(text, profile) == 0
    print(f"{applied} patched files re-parsed ({strategy})")
    assert applied > 0
    assert time.perf_counter() - start < 10


# -- 7 ----------------------------------------------------------------------------


def _gen_tree(rng, gen, depth, counter):
    """Random if/elif/else block: (lines, structure)."""
    n = rng.randint(1, 3)
    has_else = rng.random() < 0.5
    branches = []
    lines = []
    for i in range(n + (1 if has_else else 0)):
        cond = gen.expr() if i < n else None
        if i == 0:
            lines.append(f":- if(({expr_text(cond)})).")
        elif cond is not None:
            lines.append(f":- elif(({expr_text(cond)})).")
        else:
            lines.append(":- else.")
        children = []
        for _ in range(rng.randint(1, 2)):
            if depth < 2 and rng.random() < 0.3:
                sub_lines, sub = _gen_tree(rng, gen, depth + 1, counter)
                lines += sub_lines
                children.append(sub)
            else:
                counter[0] += 1
                name = f"c{counter[0]}"
                lines.append(f"{name}.")
                children.append(name)
        branches.append((cond, children))
    lines.append(":- endif.")
    return lines, ("block", branches, has_else)


def _oracle_leaves(tree, dialect, outer="yes", out=None):
    out = {} if out is None else out
    _, branches, has_else = tree
    conds = [c for c, _ in branches if c is not None]
    acts = brute_force_branches(conds, has_else, dialect)
    for (cond, children), act in zip(branches, acts):
        combined = "no" if "no" in (outer, act) else "maybe" if "maybe" in (outer, act) else "yes"
        for child in children:
            if isinstance(child, str):
                out[child] = combined
            else:
                _oracle_leaves(child, dialect, combined, out)
    return out


def _package_leaves(items, dialect, db, outer=Activity.YES, out=None):
    out = {} if out is None else out
    for item in items:
        if isinstance(item, CondBlock):
            for branch, act in select_branches(item, dialect, db):
                _package_leaves(branch.items, dialect, db, outer & act, out)
        elif isinstance(item, Clause):
            out[item.term.name] = outer.name.lower()
    return out


@pytest.mark.criterion(7, "condition evaluator matches a brute-force truth table")
def test_condition_trees_match_brute_force(db):
    rng = random.Random(77)
    mismatches = 0
    for n in range(1000):
        gen = CondGen(rng)
        lines, tree = _gen_tree(rng, gen, 0, [0])
        text = "\n".join(lines) + "\n"
        for dialect in PROFILES:
            model = read_program(text, dialect, f"tree{n}.pl")
            got = _package_leaves(model.items, dialect, db)
            want = _oracle_leaves(tree, dialect)
            if got != want:
                mismatches += 1
                if mismatches < 3:
                    print(text, dialect, got, want)
    assert mismatches == 0


# -- 8 ----------------------------------------------------------------------------


@pytest.mark.criterion(8, "invocation translation table")
@pytest.mark.parametrize(
    "source,target,argv,expected",
    [
        ("sicstus4", "swi8", ["-Dprob_core_only=true"], "PLPORT_SYSPROP_prob_core_only=true\n"),
        ("sicstus4", "swi8", ["--goal", "main."], "-g main\n"),
        ("sicstus4", "swi8", ["-l", "prob.pl"], "-l prob.pl\n"),
        ("sicstus4", "swi8", ["-a", "x", "y"], "-- x y\n"),
        ("sicstus4", "swi8", ["-a", "x", "-Dk=v"], "-- x -Dk=v\n"),
        ("sicstus4", "swi8", ["-l", "f.pl", "-a", "x", "--goal", "go."], "-l f.pl -- x --goal go.\n"),
        ("sicstus4", "swi8", ["-Dk=v", "--goal", "main.", "-l", "f.pl", "-a", "1"],
         "PLPORT_SYSPROP_k=v -g main -l f.pl -- 1\n"),
        ("swi8", "sicstus4", ["-g", "main"], "--goal main.\n"),
        ("swi8", "sicstus4", ["-l", "f.pl", "--", "x"], "-l f.pl -a x\n"),
        ("swi8", "sicstus4", ["PLPORT_SYSPROP_k=v", "-g", "main"], "-Dk=v --goal main.\n"),
        ("sicstus4", "swi8", [], ""),
    ],
)
def test_translate_table(source, target, argv, expected, capsys):
    assert main(["translate", "--from", source, "--to", target, "--", *argv]) == 0
    assert capsys.readouterr().out == expected


@pytest.mark.criterion(8, "invocation translation table")
def test_translate_malformed_define_exits_3(capsys):
    assert main(["translate", "--from", "sicstus4", "--to", "swi8", "--", "-Dno_value"]) == 3
    assert "malformed" in capsys.readouterr().err
