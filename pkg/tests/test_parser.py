"""Parser and serializer: round-trip identity, canonical form, rejection."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagforge.lang import nodes as N
from diagforge.lang.parser import ParseError, parse_program, serialize_program

from conftest import gen_expr, gen_program_source

CANONICAL_SOURCES = [
    "(return (int 0))",
    "(return (int -17))",
    '(return (str "hello"))',
    '(return (str ""))',
    '(return (str "say \\"hi\\""))',
    '(return (str "a\\\\b"))',
    "(return (var x))",
    "(return (pair (int 1) (int 2)))",
    '(return (concat (str "a") (str "b")))',
    "(let y (int 1) (return (var y)))",
    "(seq)",
    "(seq (int 1) (return (int 0)))",
    "(if (int 1) (return (int 7)) (return (int 8)))",
    "(while-true (seq))",
    "(return (quote (return (int 0))))",
    "(eval (var x) (var x))",
    "(return (bernoulli 1/2))",
    '(return (oracle "v" halts (var x1) (var x2)))',
    '(return (oracle "m" at-halt (var x)))',
    '(return (oracle "v" best-arm-halts 1/100 (var x) (var x)))',
    "(trace-final-verdict halts (var t))",
    '(return (check-trace "v" (var x1) (var x2)))',
    "(typecheck-input (var x1) (var x2))",
]


@pytest.mark.parametrize("source", CANONICAL_SOURCES)
def test_round_trip_identity_on_canonical_source(source):
    program = parse_program(source)
    assert serialize_program(program) == source
    assert parse_program(serialize_program(program)) == program


def test_whitespace_is_normalized_away():
    messy = "(  seq\n\t(int   1)\n  ( return ( int 0 ) )  )"
    assert serialize_program(parse_program(messy)) == "(seq (int 1) (return (int 0)))"


def test_serialization_is_a_fixpoint():
    program = parse_program("( return ( pair (int 1)(int 2) ) )")
    once = serialize_program(program)
    assert serialize_program(parse_program(once)) == once


def test_equal_programs_hash_equal():
    a = parse_program("(return (pair (int 1) (int 2)))")
    b = parse_program("(return (pair (int 1)(int 2)))")
    assert a == b
    assert hash(a) == hash(b)
    c = parse_program("(return (pair (int 1) (int 3)))")
    assert a != c


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "(",
        ")",
        "(return (int 0)",
        "(return (int 0)))",
        "(return (int 0)) (seq)",  # trailing form
        "(frobnicate (int 0))",  # unknown keyword
        "(int)",
        "(int x)",
        "(int 1.5)",
        '(str unquoted)',
        '(str "unterminated)',
        '(str "bad \\q escape")',
        "(bernoulli 0.5)",  # rationals are num/den
        "(bernoulli 1)",
        "(pair (int 1))",  # missing arm
        "(if (int 1) (return (int 0)))",  # missing else
        "(let (int 1) (int 2) (int 3))",  # name must be an atom
        '(oracle "v" halts)',  # wrong oracle arity
        '(oracle "v" halts (var x1) (var x2) (var x3))',
        '(oracle "v" best-arm-halts (var x) (var x))',  # missing delta
        "(oracle v halts (var x1) (var x2))",  # id must be quoted
        "(quote)",
        "return (int 0)",
    ],
)
def test_malformed_source_is_rejected(bad):
    with pytest.raises(ParseError):
        parse_program(bad)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_program("(return (frobnicate))")
    assert exc.value.pos > 0


def test_nesting_depth_is_bounded():
    deep = "(return " * 250 + "(int 0)" + ")" * 250
    with pytest.raises(ParseError):
        parse_program(deep)
    shallow = "(return " * 150 + "(int 0)" + ")" * 150
    assert parse_program(shallow) is not None


def test_generated_sources_round_trip():
    for seed in range(500):
        source = gen_program_source(seed)
        program = parse_program(source)
        canon = serialize_program(program)
        again = parse_program(canon)
        assert again == program, f"seed {seed}: {source!r}"
        assert serialize_program(again) == canon


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=6))
def test_round_trip_property(seed, depth):
    rng = random.Random(seed)
    source = gen_expr(rng, depth)
    program = parse_program(source)
    canon = serialize_program(program)
    assert parse_program(canon) == program


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40))
def test_string_literals_survive_any_content(text):
    node = N.StrLit(text)
    source = serialize_program(N.Program(N.Return(node)))
    assert parse_program(source) == N.Program(N.Return(node))


def test_quote_preserves_inner_program_exactly():
    inner = "(seq (int 1) (while-true (seq)))"
    program = parse_program(f"(return (quote {inner}))")
    quoted = program.root.value
    assert isinstance(quoted, N.Quote)
    assert serialize_program(quoted.program) == inner
