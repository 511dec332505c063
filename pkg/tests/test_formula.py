"""Formula AST, parser, printer, evaluation, and substitution."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sygra.formula import (
    FALSE,
    TRUE,
    Add,
    And,
    Atom,
    FormulaSyntaxError,
    Iff,
    Implies,
    Lit,
    Mul,
    Not,
    Or,
    Quantifier,
    Var,
    conjoin,
    evaluate,
    format_formula,
    free_vars,
    has_quantifier,
    mul,
    parse_formula,
    rename,
    simplify,
    substitute,
)

# ---------------------------------------------------------------------------
# Parsing and printing


ROUND_TRIP = [
    "true",
    "false",
    "x = 1",
    "x2 = x + 1",
    "y2 = y + 2",
    "z2 = 0",
    "a <= 2 && a2 = a + 3",
    "x < y || y < x || x = y",
    "x = 1 => y = 2",
    "x = 1 <=> y = 2",
    "!(x = 1)",
    "x + y + z = 3*w",
    "2*x - 3*y <= 4",
    "-x = 1",
    "x - 1 = y",
    "(x = 1 || y = 2) && z = 3",
    "x = 1 => (y = 2 => z = 3)",
    "!(x = 1 && y = 2) || z <= 0",
    "y2~2 = y2 + 1",
    "x' = x + 1 && x'' = x' + 1",
    "$tmp = 5",
    "a_1 + a_2 <= a_3",
]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_parse_format_round_trip(text):
    phi = parse_formula(text)
    printed = format_formula(phi)
    assert parse_formula(printed) == phi
    assert format_formula(parse_formula(printed)) == printed


def test_operator_precedence_structure():
    phi = parse_formula("x = 1 && y = 2 || z = 3")
    assert isinstance(phi, Or)
    assert isinstance(phi.operands[0], And)

    phi = parse_formula("x = 1 || y = 2 => z = 3")
    assert isinstance(phi, Implies)
    assert isinstance(phi.lhs, Or)

    phi = parse_formula("x = 1 => y = 2 <=> z = 3")
    assert isinstance(phi, Iff)
    assert isinstance(phi.lhs, Implies)

    # implication associates to the right
    phi = parse_formula("x = 1 => y = 2 => z = 3")
    assert isinstance(phi, Implies)
    assert isinstance(phi.rhs, Implies)


def test_negation_binds_tighter_than_conjunction():
    phi = parse_formula("!(x = 1) && y = 2")
    assert isinstance(phi, And)
    assert isinstance(phi.operands[0], Not)


def test_unicode_operators_are_accepted():
    assert parse_formula("x = 1 ∧ y = 2") == parse_formula("x = 1 && y = 2")
    assert parse_formula("x = 1 ∨ y = 2") == parse_formula("x = 1 || y = 2")
    assert parse_formula("¬(x = 1)") == parse_formula("!(x = 1)")


def test_reversed_comparisons_normalize():
    assert parse_formula("x >= 1") == Atom("<=", Lit(1), Var("x"))
    assert parse_formula("x > 1") == Atom("<", Lit(1), Var("x"))


def test_multiplication_needs_literal_coefficient():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("x*y = 1")


def test_parse_error_positions():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("x = @")
    assert err.value.position == 4

    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("x +")
    assert err.value.position == 3

    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("x = 1 y")
    assert err.value.position == 6


def test_parse_rejects_trailing_and_dangling_input():
    for bad in ("x = 1)", "(x = 1", "x =", "&& x = 1", "x", "true && "):
        with pytest.raises(FormulaSyntaxError):
            parse_formula(bad)


def test_identifier_charset():
    phi = parse_formula("y2~2 = y2 + 1 && x' <= $k_0")
    assert free_vars(phi) == frozenset({"y2~2", "y2", "x'", "$k_0"})


# ---------------------------------------------------------------------------
# Semantics


def test_evaluate_basic():
    phi = parse_formula("x2 = x + 1 && x <= 4")
    assert evaluate(phi, {"x": 3, "x2": 4})
    assert not evaluate(phi, {"x": 3, "x2": 5})
    assert not evaluate(phi, {"x": 5, "x2": 6})


def test_evaluate_connectives():
    assert evaluate(parse_formula("x = 1 => y = 2"), {"x": 0, "y": 0})
    assert not evaluate(parse_formula("x = 1 => y = 2"), {"x": 1, "y": 0})
    assert evaluate(parse_formula("x = 1 <=> y = 2"), {"x": 0, "y": 0})
    assert evaluate(parse_formula("!(x = 1)"), {"x": 2})
    assert evaluate(TRUE, {})
    assert not evaluate(FALSE, {})


def test_free_vars_and_quantifier_binding():
    phi = Quantifier("exists", ("y",), parse_formula("x = y"))
    assert free_vars(phi) == frozenset({"x"})
    assert has_quantifier(phi)
    assert not has_quantifier(parse_formula("x = y"))


def test_substitute_replaces_free_occurrences():
    phi = parse_formula("x2 = x + 1")
    result = substitute(phi, {"x": "c42", "x2": "c43"})
    assert result == parse_formula("c43 = c42 + 1")
    # terms can be substituted too
    result = substitute(phi, {"x": Add(Var("y"), Lit(1))})
    assert result == parse_formula("x2 = (y + 1) + 1") or result == parse_formula(
        "x2 = y + 1 + 1"
    )


def test_substitute_respects_bound_names():
    phi = Quantifier("exists", ("y",), parse_formula("x = y"))
    result = substitute(phi, {"x": "z"})
    assert result == Quantifier("exists", ("y",), parse_formula("z = y"))
    # bound occurrences stay untouched
    result = substitute(phi, {"y": "z"})
    assert result == phi


def test_rename_is_substitution_by_names():
    phi = parse_formula("x2 = x + 1")
    assert rename(phi, {"x": "a", "x2": "b"}) == parse_formula("b = a + 1")


def test_conjoin_flattens_and_drops_truth():
    parts = [TRUE, parse_formula("x = 1"), parse_formula("y = 2 && z = 3")]
    combined = conjoin(parts)
    assert combined == parse_formula("x = 1 && y = 2 && z = 3")
    assert conjoin([]) == TRUE
    assert conjoin([TRUE, TRUE]) == TRUE
    assert conjoin([parse_formula("x = 1")]) == parse_formula("x = 1")


def test_mul_helper_normalizes():
    assert mul(1, Var("x")) == Var("x")
    assert mul(0, Var("x")) == Lit(0)
    assert mul(2, Lit(3)) == Lit(6)
    assert mul(2, mul(3, Var("x"))) == Mul(6, Var("x"))


# ---------------------------------------------------------------------------
# Property tests: random ASTs round-trip and evaluate consistently

NAMES = ("x", "y", "z", "w2", "a'", "b~2")


def terms():
    leaves = st.one_of(
        st.sampled_from([Var(n) for n in NAMES]),
        st.integers(min_value=-6, max_value=6).map(Lit),
    )
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(lambda p: Add(*p)),
            st.tuples(
                st.integers(min_value=-4, max_value=4).filter(lambda c: c != 0), inner
            ).map(lambda p: mul(*p)),
        ),
        max_leaves=6,
    )


def atoms():
    return st.tuples(st.sampled_from(("=", "<=", "<")), terms(), terms()).map(
        lambda t: Atom(t[0], t[1], t[2])
    )


def formulas():
    base = st.one_of(atoms(), st.sampled_from((TRUE, FALSE)))
    return st.recursive(
        base,
        lambda inner: st.one_of(
            inner.map(Not),
            st.lists(inner, min_size=2, max_size=3).map(lambda l: And(tuple(l))),
            st.lists(inner, min_size=2, max_size=3).map(lambda l: Or(tuple(l))),
            st.tuples(inner, inner).map(lambda p: Implies(*p)),
            st.tuples(inner, inner).map(lambda p: Iff(*p)),
        ),
        max_leaves=8,
    )


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_format_parse_identity(phi):
    assert parse_formula(format_formula(phi)) == phi


@settings(max_examples=200, deadline=None)
@given(
    formulas(),
    st.fixed_dictionaries({name: st.integers(-8, 8) for name in NAMES}),
)
def test_simplify_preserves_semantics(phi, assignment):
    assert evaluate(simplify(phi), assignment) == evaluate(phi, assignment)


@settings(max_examples=200, deadline=None)
@given(
    formulas(),
    st.fixed_dictionaries({name: st.integers(-8, 8) for name in NAMES}),
    st.sampled_from(NAMES),
    st.sampled_from(NAMES),
)
def test_substitute_matches_reassignment(phi, assignment, old, new):
    substituted = substitute(phi, {old: new})
    shifted = dict(assignment)
    shifted[old] = assignment[new]
    assert evaluate(substituted, assignment) == evaluate(phi, shifted)
