import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plport.conditions import Activity, CondValue, eval_condition, select_branches
from plport.dialect_db import seed_catalog
from plport.reader import CondBlock, read_program, read_term
from oracles import ATOMS, brute_force_branches, expr_text

T, F, U = CondValue.TRUE, CondValue.FALSE, CondValue.UNKNOWN


def ev(text, dialect, db):
    return eval_condition(read_term(text)[0], dialect, db)


@pytest.mark.parametrize("text", sorted(ATOMS))
@pytest.mark.parametrize("dialect", ["sicstus4", "swi8"])
def test_known_atoms(text, dialect, db):
    assert ev(text, dialect, db) is CondValue.of(ATOMS[text][dialect])


@pytest.mark.parametrize(
    "text, sics, swi",
    [
        ("my_check(1)", U, U),
        ("\\+ my_check(1)", U, U),
        ("(my_check(1) ; true)", T, T),
        ("(my_check(1) , fail)", F, F),
        ("(current_prolog_flag(dialect, swi) -> true ; my_check(1))", U, T),
        ("exists_source(library(dicts))", U, T),
        ("current_prolog_flag(version_data, swi(M, _, _, _)), M >= 8", F, T),
        ("X = 1, X == 1", T, T),
        ("X = 1, X == 2", F, F),
        ("X > 1", U, U),
        ("1 + 1 =:= 2", T, T),
        ("current_predicate(set_random/1)", F, T),
        ("catch(_ is cot(1.0), _, fail)", F, T),
        ("current_arithmetic_function(cot(_))", U, T),
    ],
)
def test_examples(text, sics, swi, db):
    assert (ev(text, "sicstus4", db), ev(text, "swi8", db)) == (sics, swi)


def test_version_specific(db):
    cond = "current_prolog_flag(version_data, swi(M, _, _, _)), M >= 9"
    assert ev(cond, "swi8", db) is F
    assert ev(cond, "swi8@9.1", db) is T


def test_binding_in_disjunction_is_poisoned(db):
    # X is 1 on either path, but bindings inside a disjunction are not tracked.
    assert ev("(my_check(1) ; true), X = 1, X == 1", "swi8", db) is T
    assert ev("(my_check(1), X = 1 ; X = 1), X == 1", "swi8", db) is U


def _block(text, dialect, db):
    block, = read_program(text, dialect).items
    assert isinstance(block, CondBlock)
    return [a for _, a in select_branches(block, dialect, db)]


def test_listing_branches(repo_root, db):
    text = (repo_root / "corpus" / "random_seed_listing.pl").read_text()
    assert _block(text, "sicstus4", db) == [Activity.NO, Activity.YES]
    assert _block(text, "swi8", db) == [Activity.YES, Activity.NO]


def test_maybe_then_else(db):
    text = ":- if(my_check(1)).\na.\n:- else.\nb.\n:- endif.\n"
    assert _block(text, "swi8", db) == [Activity.MAYBE, Activity.MAYBE]


def test_true_condition_disables_rest(db):
    text = ":- if(my_check(1)).\na.\n:- elif(true).\nb.\n:- elif(my_check(2)).\nc.\n:- else.\nd.\n:- endif.\n"
    assert _block(text, "swi8", db) == [Activity.MAYBE, Activity.MAYBE, Activity.NO, Activity.NO]


def test_repeated_unknown_is_not_correlated(db):
    # The same undecidable goal in two conditions is treated as two
    # independent unknowns: the else branch is reported maybe, never no.
    text = ":- if(my_check(1)).\na.\n:- elif(\\+ my_check(1)).\nb.\n:- else.\nc.\n:- endif.\n"
    assert _block(text, "swi8", db) == [Activity.MAYBE] * 3


leaf_names = sorted(ATOMS) + ["my_check(_)"]
exprs = st.recursive(
    st.sampled_from(leaf_names).map(lambda a: ("atom", a)),
    lambda sub: st.one_of(
        st.tuples(st.just("and"), sub, sub),
        st.tuples(st.just("or"), sub, sub),
        st.tuples(st.just("not"), sub),
    ),
    max_leaves=6,
)


@settings(max_examples=300, deadline=None)
@given(st.lists(exprs, min_size=1, max_size=3), st.booleans(), st.sampled_from(["sicstus4", "swi8"]))
def test_select_branches_matches_brute_force(conds, has_else, dialect):
    db = seed_catalog()
    counter = [0]

    def number(e):
        # every unknown goal occurrence is a distinct, independent goal
        if e[0] == "atom":
            if e[1] == "my_check(_)":
                counter[0] += 1
                return ("atom", f"my_check({counter[0]})")
            return e
        return (e[0],) + tuple(number(x) for x in e[1:])

    conds = [number(c) for c in conds]
    lines = []
    for i, c in enumerate(conds):
        lines.append(f":- {'if' if i == 0 else 'elif'}(({expr_text(c)})).")
        lines.append(f"b{i}.")
    if has_else:
        lines += [":- else.", "b_else."]
    lines.append(":- endif.")
    got = [a.value for a in _block("\n".join(lines) + "\n", dialect, db)]
    assert got == brute_force_branches(conds, has_else, dialect)
