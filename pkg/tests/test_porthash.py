import pytest
from hypothesis import given, settings

from plport.errors import NonGroundTerm
from plport.porthash import HashOptions, fnv1a64, hash_hex, serialize_canonical, term_hash
from plport.reader import read_term
from plport.terms import Atom, Compound, Float, Int, Str, Var, make_list
from oracles import encode_ref, fnv1a_ref
from strategies import generated_terms, terms


def test_atom_encoding():
    assert serialize_canonical(Atom("a")) == bytes.fromhex("01" "00000001" "61")


def test_empty_atom():
    assert hash_hex(term_hash(Atom(""))) == "d80d6caea7dc7eec"


def test_fnv_known_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_hex_width():
    assert hash_hex(1) == "0000000000000001"


def test_variant_terms_hash_equal():
    X, Y = Var("X", 0), Var("Y", 1)
    assert term_hash(Compound("f", (X, X))) == term_hash(Compound("f", (Y, Y)))
    assert term_hash(Compound("f", (X, Y))) != term_hash(Compound("f", (X, X)))


def test_list_hash_is_profile_independent():
    sics = read_term("[a,b|T]", "sicstus4")[0]
    swi = read_term("[a,b|T]", "swi8")[0]
    assert term_hash(sics) == term_hash(swi)


def test_int_float_distinct():
    assert term_hash(Int(1)) != term_hash(Float(1.0))
    assert term_hash(Str("a")) != term_hash(Atom("a"))


def test_bigint():
    big = Int(10**40)
    assert serialize_canonical(big) == encode_ref(big)


def test_depth_limit():
    deep1 = Compound("f", (Compound("g", (Atom("a"),)),))
    deep2 = Compound("f", (Compound("g", (Atom("b"),)),))
    opts = HashOptions(depth=2)
    assert term_hash(deep1, opts) == term_hash(deep2, opts)
    assert term_hash(deep1) != term_hash(deep2)
    with pytest.raises(ValueError):
        HashOptions(depth=0)


def test_reject_variables():
    with pytest.raises(NonGroundTerm):
        term_hash(Compound("f", (Var("X", 0),)), HashOptions(on_variable="reject"))


def test_long_list_iterative():
    t = make_list([Int(i) for i in range(100_000)])
    assert len(hash_hex(term_hash(t))) == 16


@settings(max_examples=300, deadline=None)
@given(terms())
def test_matches_reference_encoder(t):
    data = serialize_canonical(t)
    assert data == encode_ref(t)
    assert fnv1a64(data) == fnv1a_ref(data)


def _swap_list_functor(t):
    if isinstance(t, Compound):
        functor = "[|]" if t.functor == "." and t.arity == 2 else t.functor
        return Compound(functor, tuple(_swap_list_functor(a) for a in t.args))
    return t


@settings(max_examples=100, deadline=None)
@given(generated_terms("."))
def test_generated_hash_stable_across_list_functor(t):
    assert term_hash(t) == term_hash(_swap_list_functor(t))
