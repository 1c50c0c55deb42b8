"""Hypothesis strategies for terms."""

import math

from hypothesis import strategies as st

from plport.corpus import generate_random_term
from plport.terms import Atom, Compound, Float, Int, Str, Var, make_list

atom_names = st.one_of(
    st.sampled_from(["a", "foo", "[]", "{}", "!", ";", ",", "|", "", "hello world", "it's", "+", "\\", "é", "λ",
                     " x", ".", "'", "a\nb", "[|]", "-", "$x", "A", "_"]),
    st.text(max_size=6),
)
var_names = st.sampled_from(["X", "Y", "Z", "_A", "Long_Name"])


def variables():
    return st.builds(lambda n, i: Var(n, i), var_names, st.integers(0, 4))


leaves = st.one_of(
    st.builds(Atom, atom_names),
    st.builds(Int, st.integers(min_value=-(10**30), max_value=10**30)),
    st.builds(Float, st.floats(allow_nan=True, allow_infinity=True)),
    variables(),
)


def terms(list_functor=".", allow_strings=False):
    base = st.one_of(leaves, st.builds(Str, st.text(max_size=5))) if allow_strings else leaves

    def extend(children):
        return st.one_of(
            st.builds(lambda f, args: Compound(f, tuple(args)), atom_names, st.lists(children, min_size=1, max_size=4)),
            st.builds(lambda items, tail: make_list(items, tail, list_functor), st.lists(children, max_size=4),
                      st.one_of(st.just(Atom("[]")), children)),
        )

    return st.recursive(base, extend, max_leaves=20)


def generated_terms(list_functor=".", allow_strings=False):
    return st.builds(
        lambda seed, budget: generate_random_term(seed, budget, list_functor, allow_strings),
        st.integers(0, 2**64 - 1),
        st.integers(1, 60),
    )


def is_nan(t):
    return isinstance(t, Float) and math.isnan(t.value)
