"""Decision procedures: builtin exactness and cross-check against the
independent SMT-LIB subprocess backend."""

import random

import pytest

from sygra.formula import (
    FALSE,
    TRUE,
    Add,
    And,
    Atom,
    Iff,
    Lit,
    Not,
    Or,
    Quantifier,
    Var,
    evaluate,
    mul,
    parse_formula,
)
from sygra.smtlib import SmtLaunchError, SmtSession
from sygra.solver import Solver, SolverConfig, builtin_check_sat

# ---------------------------------------------------------------------------
# Random quantifier-free conjunctive formulas: <= 5 variables,
# coefficients in [-4, 4].

VARS = ("a", "b", "c", "d", "e")


def random_atom(rng: random.Random) -> Atom:
    used = rng.sample(VARS, rng.randint(1, 3))
    term = None
    for name in used:
        coeff = rng.choice([c for c in range(-4, 5) if c != 0])
        part = mul(coeff, Var(name))
        term = part if term is None else Add(term, part)
    op = rng.choice(("=", "<=", "<"))
    return Atom(op, term, Lit(rng.randint(-10, 10)))


def random_conjunction(rng: random.Random) -> And | Atom:
    atoms = [random_atom(rng) for _ in range(rng.randint(1, 5))]
    return atoms[0] if len(atoms) == 1 else And(tuple(atoms))


def test_builtin_agrees_with_subprocess_solver_on_300_formulas():
    rng = random.Random(88)
    formulas = [random_conjunction(rng) for _ in range(300)]
    builtin_unknowns = 0
    disagreements = []
    with SmtSession() as session:
        for index, phi in enumerate(formulas):
            ours = builtin_check_sat(phi)
            theirs = session.check_sat(phi)
            if ours.is_unknown:
                builtin_unknowns += 1
                continue
            if theirs.is_unknown:
                continue
            if ours.status != theirs.status:
                disagreements.append((index, phi, ours.status, theirs.status))
        # implication and equivalence checks, through the same encodings
        # both backends receive
        for first, second in zip(formulas, formulas[1:]):
            implies = And((first, Not(second)))
            equiv = Not(Iff(first, second))
            for encoded in (implies, equiv):
                ours = builtin_check_sat(encoded)
                theirs = session.check_sat(encoded)
                if ours.is_unknown:
                    builtin_unknowns += 1
                    continue
                if theirs.is_unknown:
                    continue
                if ours.status != theirs.status:
                    disagreements.append((-1, encoded, ours.status, theirs.status))
    assert disagreements == []
    assert builtin_unknowns == 0


def test_builtin_models_satisfy_their_formulas():
    rng = random.Random(1234)
    checked = 0
    for _ in range(150):
        phi = random_conjunction(rng)
        verdict = builtin_check_sat(phi)
        if verdict.is_sat:
            assert verdict.model is not None
            padded = {name: verdict.model.get(name, 0) for name in VARS}
            assert evaluate(phi, padded), (phi, verdict.model)
            checked += 1
    assert checked >= 30


# ---------------------------------------------------------------------------
# Directed cases for the builtin procedure


DIRECTED = [
    ("x = 1 && x = 2", False),
    ("x = 1 && x <= 0", False),
    ("x + y <= 0 && 1 <= x && 1 <= y", False),
    ("2*x = 3", False),
    ("2*x = 4", True),
    ("2*x = 2*y + 1", False),
    ("3*x + 2*y = 1", True),
    ("x < y && y < x", False),
    ("x < y && y < z && z < x", False),
    ("x <= y && y <= x && x = y", True),
    ("-4*x = 8", True),
    ("!(x = 1)", True),
    ("!(x <= 1) && x <= 2", True),
    ("x = 1 || x = 2", True),
    ("(x = 1 || x = 2) && !(x = 1) && !(x = 2)", False),
    ("x = 1 => x = 2", True),
    ("x = y && y = z && !(x = z)", False),
    ("true", True),
    ("false", False),
]


@pytest.mark.parametrize("text,expected", DIRECTED)
def test_builtin_directed_verdicts(text, expected):
    verdict = builtin_check_sat(parse_formula(text))
    assert not verdict.is_unknown
    assert verdict.is_sat == expected


def test_truth_constants():
    assert builtin_check_sat(TRUE).is_sat
    assert builtin_check_sat(FALSE).is_unsat


def test_builtin_reports_unknown_on_quantifiers():
    phi = Quantifier("exists", ("y",), parse_formula("x = y + 1"))
    verdict = builtin_check_sat(phi)
    assert verdict.is_unknown
    assert verdict.diagnostic


def test_builtin_reports_unknown_past_dnf_limit():
    choice = parse_formula("x = 0 || x = 1")
    phi = And((choice,) * 5)
    verdict = builtin_check_sat(phi, dnf_limit=4)
    assert verdict.is_unknown
    assert builtin_check_sat(phi).is_sat  # fine under the default limit


# ---------------------------------------------------------------------------
# Solver facade: boolean views, stats, escalation


def test_boolean_views(solver):
    assert solver.satisfiable(parse_formula("x = 1")) is True
    assert solver.satisfiable(parse_formula("x = 1 && x = 2")) is False
    assert solver.implies(parse_formula("x = 1"), parse_formula("1 <= x")) is True
    assert solver.implies(parse_formula("1 <= x"), parse_formula("x = 1")) is False
    assert solver.equivalent(parse_formula("x <= 1"), parse_formula("x < 2")) is True
    assert solver.equivalent(parse_formula("x <= 1"), parse_formula("x < 1")) is False
    model = solver.model(parse_formula("x = y + 3 && y = 2"))
    assert model is not None and model["x"] == 5 and model["y"] == 2
    assert solver.model(parse_formula("x = 1 && x = 2")) is None


def test_builtin_solver_returns_none_on_undecided(solver):
    phi = Quantifier("exists", ("y",), parse_formula("x = y + 1"))
    assert solver.satisfiable(phi) is None
    assert solver.stats.unknown >= 1
    assert solver.stats.external_queries == 0


def test_stats_count_queries(solver):
    base = solver.stats.queries
    solver.satisfiable(parse_formula("x = 1"))
    solver.satisfiable(parse_formula("x = 1 && x = 2"))
    assert solver.stats.queries == base + 2
    assert solver.stats.sat >= 1
    assert solver.stats.unsat >= 1
    as_dict = solver.stats.as_dict()
    assert set(as_dict) == {"queries", "sat", "unsat", "unknown", "external_queries"}


def test_external_backend_escalates_when_builtin_gives_up():
    config = SolverConfig(backend="external", dnf_limit=4)
    choice = parse_formula("x = 0 || x = 1")
    phi = And((choice,) * 5)
    with Solver(config) as solver:
        assert solver.satisfiable(phi) is True
        assert solver.stats.external_queries >= 1
        # contradiction through the same escalation path
        bad = And((phi, parse_formula("x = 2")))
        assert solver.satisfiable(bad) is False


def test_external_backend_answers_match_builtin_answers():
    rng = random.Random(4321)
    config = SolverConfig(backend="external", dnf_limit=1)
    with Solver(config) as escalating, Solver() as plain:
        for _ in range(40):
            phi = Or((random_conjunction(rng), random_conjunction(rng)))
            expected = plain.satisfiable(phi)
            assert expected is not None
            assert escalating.satisfiable(phi) == expected
        assert escalating.stats.external_queries >= 30


def test_launch_failure_raises(tmp_path):
    config = SolverConfig(
        backend="external",
        smt_command=(str(tmp_path / "missing-binary"),),
        dnf_limit=1,
    )
    with Solver(config) as solver:
        with pytest.raises(SmtLaunchError):
            solver.satisfiable(parse_formula("x = 0 || x = 1"))


def test_session_handles_decorated_identifiers():
    with SmtSession() as session:
        phi = parse_formula("y2~2 = y2 + 1 && x' = y2~2 && $k = 0")
        verdict = session.check_sat(phi, want_model=True)
        assert verdict.is_sat
        assert verdict.model["y2~2"] == verdict.model["y2"] + 1
        assert verdict.model["x'"] == verdict.model["y2~2"]
        assert verdict.model["$k"] == 0


def test_session_survives_many_queries():
    with SmtSession() as session:
        for value in range(30):
            phi = parse_formula(f"x = {value} && x <= {value}")
            assert session.check_sat(phi).is_sat
        assert session.check_sat(parse_formula("x = 1 && x = 2")).is_unsat


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(backend="z3")


def test_close_is_idempotent():
    solver = Solver()
    solver.satisfiable(TRUE)
    solver.close()
    solver.close()
