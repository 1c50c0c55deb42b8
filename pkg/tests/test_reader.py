import pytest
from hypothesis import given, settings

from plport.errors import LexError, ParseError, UnbalancedConditional
from plport.lexer import tokenize
from plport.profiles import get_profile
from plport.reader import Clause, CondBlock, Directive, decode_source, read_program, read_term, read_terms
from plport.terms import Atom, Compound, Int, Str, structural_eq
from plport.writer import write_canonical, write_profile
from strategies import generated_terms

SICS = get_profile("sicstus4")
SWI = get_profile("swi8")


def kinds(text, profile=SICS):
    return [(tok.kind, tok.value) for tok, _ in tokenize(text, profile)]


class TestTokenize:
    def test_char_code(self):
        assert kinds("0'a") == [("int", 97)]

    def test_latin1_letters_form_names(self):
        assert kinds("héllo ok") == [("name", "héllo"), ("name", "ok")]

    def test_cjk_outside_quotes_rejected_by_sicstus(self):
        with pytest.raises(LexError) as exc:
            tokenize("世", SICS)
        assert "U+4E16" in str(exc.value)

    def test_spans_are_one_based(self):
        (_, span), = tokenize("  foo", SICS)
        assert (span.start_line, span.start_col) == (1, 3)


class TestReadTerm:
    def test_double_quotes_default_per_dialect(self):
        codes, _, _ = read_term('"ab"', "sicstus4")
        assert codes == Compound(".", (Int(97), Compound(".", (Int(98), Atom("[]")))))
        assert read_term('"ab"', "swi8")[0] == Str("ab")

    def test_double_quotes_override(self):
        assert read_term('"ab"', "sicstus4", overrides="atom")[0] == Atom("ab")

    def test_list_functor_per_dialect(self):
        assert read_term("[a]", "swi8")[0] == Compound("[|]", (Atom("a"), Atom("[]")))
        assert read_term("[a]", "sicstus4")[0] == Compound(".", (Atom("a"), Atom("[]")))

    def test_variable_names(self):
        t, names, _ = read_term("f(X, Y, X)")
        assert set(names) == {"X", "Y"}
        assert t.args[0] is names["X"] or t.args[0] == names["X"]

    def test_operators(self):
        t, _, _ = read_term("a :- b, c")
        assert t == Compound(":-", (Atom("a"), Compound(",", (Atom("b"), Atom("c")))))

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            read_term("a b")

    def test_bad_override(self):
        with pytest.raises(ValueError):
            read_term("a", overrides="bogus")

    def test_read_terms(self):
        assert [t for t, _, _ in read_terms("a. b. c.")] == [Atom("a"), Atom("b"), Atom("c")]


class TestProgram:
    def test_listing_structure(self, repo_root):
        text = (repo_root / "corpus" / "random_seed_listing.pl").read_text()
        model = read_program(text, "sicstus4", file="listing.pl")
        blocks = [i for i in model.items if isinstance(i, CondBlock)]
        assert len(blocks) == 1
        assert len(blocks[0].branches) == 2
        assert blocks[0].branches[1].condition is None
        clauses = [i for i in model.walk() if isinstance(i, Clause)]
        directives = [i for i in model.walk() if isinstance(i, Directive)]
        assert len(clauses) == 2 and len(directives) == 1

    def test_three_clauses(self):
        model = read_program("p(1).\np(2).\nq :- p(_).\n")
        assert len(model.items) == 3
        assert [i.span.start_line for i in model.items] == [1, 2, 3]

    @pytest.mark.parametrize("text", [":- if(true).\na.\n", ":- endif.\n", ":- else.\n", ":- if(true).\n:- else.\n:- else.\n:- endif.\n"])
    def test_unbalanced(self, text):
        with pytest.raises(UnbalancedConditional):
            read_program(text)

    def test_nested_blocks(self):
        model = read_program(":- if(a).\n:- if(b).\nx.\n:- endif.\n:- elif(c).\ny.\n:- endif.\n")
        outer, = model.items
        assert isinstance(outer.branches[0].items[0], CondBlock)
        assert len(outer.branches) == 2

    def test_op_directive_changes_parsing(self):
        model = read_program(":- op(700, xfx, ===>).\na ===> b.\n")
        clause = model.items[-1]
        assert clause.term == Compound("===>", (Atom("a"), Atom("b")))


def test_decode_fallback():
    assert decode_source("é".encode("utf-8")) == ("é", None)
    text, notice = decode_source(b"caf\xe9")
    assert text == "café" and "ISO 8859-1" in notice


@settings(max_examples=150, deadline=None)
@given(generated_terms("."))
def test_canonical_round_trip_sicstus(t):
    text = write_canonical(t, write_profile("sicstus4"))
    back, _, _ = read_term(text, "sicstus4")
    assert structural_eq(back, t)


@settings(max_examples=150, deadline=None)
@given(generated_terms("[|]", allow_strings=True))
def test_canonical_round_trip_swi(t):
    text = write_canonical(t, write_profile("swi8"))
    back, _, _ = read_term(text, "swi8")
    assert structural_eq(back, t)
