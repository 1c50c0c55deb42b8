import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plport.errors import MalformedBlockSpec, NoConditionAvailable, OverlappingFixes, StaleSpan, UnknownShim
from plport.reader import Clause, Directive, read_program, read_term
from plport.rewriter import (
    FixPlan,
    apply_fixes,
    block_fix,
    build_conditional,
    conditionalize,
    emit_feature_shim,
    rename_call,
    select_plans,
    translate_block_directive,
    unified_diff,
    wake_condition,
)
from plport.shims import SHIMS
from plport.terms import Compound, SourceSpan, Var
from oracles import all_patterns, block_runs, eval_wake

SEED_CLAUSE = "set_new_random_seed :- set_random(seed(random))."
SEED_OTHER = "set_new_random_seed :- now(T), setrand(T)."


class TestConditionalize:
    def test_listing_shape(self, db):
        text = SEED_CLAUSE + "\n"
        model = read_program(text)
        plan = conditionalize(model.items, {"swi8": SEED_CLAUSE, "sicstus4": SEED_OTHER}, db, text)
        assert apply_fixes(text, [plan]) == (
            ":- if(predicate_property(set_random(_), _)).\n"
            f"  {SEED_CLAUSE}\n"
            ":- else.\n"
            f"  {SEED_OTHER}\n"
            ":- endif.\n"
        )

    def test_result_reads_back(self, db):
        text = "p :- a.\nq.\n"
        model = read_program(text)
        plan = conditionalize(model.items[:1], {"swi8": "p :- b.", "sicstus4": "p :- c."}, db, text)
        patched = apply_fixes(text, [plan])
        assert patched.endswith("q.\n")
        read_program(patched, "swi8")
        read_program(patched, "sicstus4")

    def test_single_variant_is_identity(self, db):
        text = "p :- a.\n"
        model = read_program(text)
        plan = conditionalize(model.items, {"swi8": "p :- a.", "sicstus4": "p :- a."}, db, text)
        assert apply_fixes(text, [plan]) == text

    def test_empty_region(self, db):
        with pytest.raises(ValueError):
            conditionalize([], {"swi8": "a."}, db, "")

    def test_version_condition(self, db):
        out = build_conditional({"swi8>=9.0.0": "a.", "default": "b."}, db)
        assert "current_prolog_flag(version_data, V), V @>= swi(9,0,0,[])" in out
        assert out.splitlines()[-1] == ":- endif."

    def test_indistinguishable_variants(self, db):
        with pytest.raises(NoConditionAvailable):
            build_conditional({"swi8": "a.", "swi": "b."}, db)


class TestRenameCall:
    def test_prefix_permutation(self, db):
        rec = db.lookup_predicate("prefix", 2, "lists")
        goal = read_term("prefix(Whole, Part)")[0]
        out = rename_call(goal, rec, "swi8")
        assert out.functor == "prefix" and out.args == (goal.args[1], goal.args[0])

    def test_supported_is_unchanged(self, db):
        rec = db.lookup_predicate("copy_term", 2)
        goal = read_term("copy_term(A, B)")[0]
        assert rename_call(goal, rec, "swi8") == goal


def _spec(text):
    return read_term(text)[0]


class TestBlock:
    ARGS = (Var("A1", 0), Var("A2", 1), Var("A3", 2))

    def test_single_minus(self):
        cond = wake_condition([_spec("p(-)")], self.ARGS[:1])
        assert cond == Compound("nonvar", (self.ARGS[0],))

    def test_no_minus_never_blocks(self):
        assert wake_condition([_spec("p(?,?)")], self.ARGS[:2]) is None

    def test_bad_spec(self):
        with pytest.raises(MalformedBlockSpec):
            wake_condition([_spec("p(x)")], self.ARGS[:1])

    def test_arity_mismatch(self):
        with pytest.raises(MalformedBlockSpec):
            translate_block_directive([_spec("p(-)"), _spec("p(-,-)")], [])

    def test_merge_wrapper(self):
        text = (":- block merge(-,?,-), merge(?,-,-).\n"
                "merge([], Y, Y).\nmerge(X, [], X).\n")
        model = read_program(text)
        directive = next(i for i in model.items if isinstance(i, Directive))
        patched = apply_fixes(text, [block_fix(model, directive)])
        assert patched == (
            "% translated from :- block merge(-,?,-), merge(?,-,-).\n"
            "merge(A1, A2, A3) :-\n"
            "    when(((nonvar(A1);nonvar(A3)),(nonvar(A2);nonvar(A3))), merge__unblocked(A1, A2, A3)).\n"
            "merge__unblocked([], Y, Y).\n"
            "merge__unblocked(X, [], X).\n"
        )
        read_program(patched, "swi8")

    def test_translate_terms(self):
        model = read_program("p(a).\np(b).\n")
        clauses = [c for c in model.items if isinstance(c, Clause)]
        out = translate_block_directive([_spec("p(-)")], clauses)
        assert len(out) == 3
        wrapper = out[0]
        assert wrapper.args[1].functor == "when"

    def test_clause_mismatch(self):
        model = read_program("q(a).\n")
        with pytest.raises(MalformedBlockSpec):
            translate_block_directive([_spec("p(-)")], list(model.items))


modes = st.sampled_from("-?")


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(modes, min_size=n, max_size=n), min_size=1, max_size=4)))
def test_wake_condition_matches_block_semantics(specs):
    n = len(specs[0])
    args = tuple(Var(f"A{i + 1}", i) for i in range(n))
    terms = [Compound("p", tuple(read_term(m)[0] for m in spec)) for spec in specs]
    cond = wake_condition(terms, args)
    for bound in all_patterns(n):
        assert eval_wake(cond, args, bound) == block_runs(specs, bound)


class TestShims:
    @pytest.mark.parametrize("shim_id", sorted(SHIMS))
    def test_every_shim_parses(self, shim_id):
        path, text = emit_feature_shim(shim_id)
        assert path.endswith(f"{shim_id}.pl")
        read_program(text, "swi8")
        read_program(text, "sicstus4")

    def test_mutable_exports(self):
        _, text = emit_feature_shim("mutable_terms")
        assert "create_mutable/2" in text

    def test_unknown(self):
        with pytest.raises(UnknownShim):
            emit_feature_shim("nope")

    def test_shim_dir(self):
        path, _ = emit_feature_shim("mutable_terms", shim_dir="compat")
        assert path.startswith("compat")


def plan(line, col_start, col_end, original, replacement):
    return FixPlan("rename_call", SourceSpan("f", line, col_start, line, col_end), replacement, original=original)


class TestApplyFixes:
    TEXT = "abc\ndef\n"

    def test_empty(self):
        assert apply_fixes(self.TEXT, []) == self.TEXT
        assert apply_fixes(self.TEXT, [], mode="diff") == ""

    def test_disjoint_order_independent(self):
        p1, p2 = plan(1, 1, 2, "a", "X"), plan(2, 2, 3, "e", "Y")
        assert apply_fixes(self.TEXT, [p1, p2]) == apply_fixes(self.TEXT, [p2, p1]) == "Xbc\ndYf\n"

    def test_overlap(self):
        with pytest.raises(OverlappingFixes):
            apply_fixes(self.TEXT, [plan(1, 1, 3, "ab", "X"), plan(1, 2, 4, "bc", "Y")])

    def test_overlap_selection(self):
        kept, dropped = select_plans([plan(1, 1, 3, "ab", "X"), plan(1, 2, 4, "bc", "Y")])
        assert len(kept) == 1 and len(dropped) == 1

    def test_stale_after_apply(self):
        p = plan(1, 1, 2, "a", "X")
        once = apply_fixes(self.TEXT, [p])
        with pytest.raises(StaleSpan):
            apply_fixes(once, [p])

    def test_span_outside_file(self):
        with pytest.raises(StaleSpan):
            apply_fixes(self.TEXT, [plan(9, 1, 2, "a", "X")])

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            apply_fixes(self.TEXT, [], mode="bogus")

    def test_diff_format(self):
        out = apply_fixes(self.TEXT, [plan(1, 1, 2, "a", "X")], mode="diff", path="f.pl")
        assert out.splitlines()[:3] == ["--- a/f.pl", "+++ b/f.pl", "@@ -1,2 +1,2 @@"]


def test_diff_missing_newline():
    out = unified_diff("a", "b", "f.pl")
    assert "\\ No newline at end of file" in out
