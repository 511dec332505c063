"""Satisfiability checking for label formulas.

Two backends sit behind one facade. The builtin procedure decides
linear integer arithmetic without external help: formulas are expanded
to disjunctive normal form, equalities are eliminated by integer
Gaussian steps that track divisibility, and the remaining inequalities
are projected variable by variable using exact and dark shadows with
splintering for the gray zone, so the builtin answer is definitive on
every quantifier-free input it accepts. Quantified formulas (or DNF
blowups past the configured limit) come back unknown, and a solver
configured with the external backend then escalates the query to an
SMT process speaking SMT-LIB over a pipe (see ``smtlib``).

Sat verdicts can carry a model; models returned by the builtin backend
are always verified against the source formula before being handed out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd
from typing import Mapping

from .formula import (
    FALSE,
    TRUE,
    Add,
    And,
    Atom,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Lit,
    Mul,
    Not,
    Or,
    Quantifier,
    Term,
    Truth,
    Var,
    evaluate,
    free_vars,
)

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

Assignment = dict[str, int]


@dataclass(frozen=True)
class SolverVerdict:
    status: str
    model: Assignment | None = None
    diagnostic: str | None = None

    def __post_init__(self):
        if self.status not in (SAT, UNSAT, UNKNOWN):
            raise ValueError(f"bad verdict status {self.status!r}")

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == UNSAT

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN


@dataclass(frozen=True)
class SolverConfig:
    """Backend selection and query limits.

    backend: "builtin" decides locally and reports unknown past its
    fragment; "external" additionally escalates unknowns to the SMT
    process given by smt_command (or the SYGRA_SMT_CMD environment
    variable, or an auto-detected default).
    """

    backend: str = "builtin"
    smt_command: tuple[str, ...] | None = None
    timeout_ms: int = 10_000
    dnf_limit: int = 4096

    def __post_init__(self):
        if self.backend not in ("builtin", "external"):
            raise ValueError(f"unknown solver backend {self.backend!r}")


@dataclass
class SolverStats:
    queries: int = 0
    sat: int = 0
    unsat: int = 0
    unknown: int = 0
    external_queries: int = 0

    def record(self, verdict: SolverVerdict, external: bool) -> None:
        self.queries += 1
        if external:
            self.external_queries += 1
        if verdict.is_sat:
            self.sat += 1
        elif verdict.is_unsat:
            self.unsat += 1
        else:
            self.unknown += 1

    def as_dict(self) -> dict[str, int]:
        return {
            "queries": self.queries,
            "sat": self.sat,
            "unsat": self.unsat,
            "unknown": self.unknown,
            "external_queries": self.external_queries,
        }


# ---------------------------------------------------------------------------
# Linear normalization
#
# A linear expression is a coefficient map plus a constant. An atom is
# normalized to ("eq", expr) for expr = 0 or ("ge", expr) for expr >= 0;
# strict bounds fold the +1 into the constant since models are integral.

LinExpr = tuple[dict[str, int], int]
LinAtom = tuple[str, dict[str, int], int]


class _Blowup(Exception):
    pass


def _linear_term(term: Term) -> LinExpr:
    match term:
        case Var(name):
            return {name: 1}, 0
        case Lit(value):
            return {}, value
        case Add(lhs, rhs):
            a_coeffs, a_const = _linear_term(lhs)
            b_coeffs, b_const = _linear_term(rhs)
            out = dict(a_coeffs)
            for name, coeff in b_coeffs.items():
                out[name] = out.get(name, 0) + coeff
            return out, a_const + b_const
        case Mul(coeff, operand):
            coeffs, const = _linear_term(operand)
            return {name: coeff * c for name, c in coeffs.items()}, coeff * const
    raise FormulaError(f"not a term: {term!r}")


def _diff(lhs: Term, rhs: Term) -> LinExpr:
    """lhs - rhs as a linear expression with zero coefficients dropped."""
    l_coeffs, l_const = _linear_term(lhs)
    r_coeffs, r_const = _linear_term(rhs)
    out = dict(l_coeffs)
    for name, coeff in r_coeffs.items():
        out[name] = out.get(name, 0) - coeff
    return {k: v for k, v in out.items() if v}, l_const - r_const


def _atom_cubes(atom: Atom, positive: bool) -> list[list[LinAtom]]:
    coeffs, const = _diff(atom.lhs, atom.rhs)
    if atom.op == "=":
        if positive:
            return [[("eq", coeffs, const)]]
        # lhs != rhs splits into lhs < rhs or rhs < lhs
        neg = {k: -v for k, v in coeffs.items()}
        return [[("ge", neg, -const - 1)], [("ge", coeffs, const - 1)]]
    if atom.op == "<=":
        if positive:  # rhs - lhs >= 0
            return [[("ge", {k: -v for k, v in coeffs.items()}, -const)]]
        return [[("ge", coeffs, const - 1)]]  # lhs > rhs
    if atom.op == "<":
        if positive:
            return [[("ge", {k: -v for k, v in coeffs.items()}, -const - 1)]]
        return [[("ge", coeffs, const)]]  # lhs >= rhs
    raise FormulaError(f"unknown comparison {atom.op!r}")


def _cross(groups: list[list[list[LinAtom]]], limit: int) -> list[list[LinAtom]]:
    result: list[list[LinAtom]] = [[]]
    for cubes in groups:
        combined = []
        for base, extra in itertools.product(result, cubes):
            combined.append(base + extra)
            if len(combined) > limit:
                raise _Blowup()
        result = combined
    return result


def _union(groups: list[list[list[LinAtom]]], limit: int) -> list[list[LinAtom]]:
    out: list[list[LinAtom]] = []
    for cubes in groups:
        out.extend(cubes)
        if len(out) > limit:
            raise _Blowup()
    return out


def formula_to_cubes(phi: Formula, limit: int = 4096) -> list[list[LinAtom]] | None:
    """Disjunctive normal form as lists of normalized linear atoms.

    Returns None when the formula leaves the decidable fragment
    (quantifiers) or the expansion exceeds the limit.
    """
    try:
        return _dnf(phi, True, limit)
    except _Blowup:
        return None


def _dnf(phi: Formula, positive: bool, limit: int) -> list[list[LinAtom]] | None:
    match phi:
        case Truth(value):
            return [[]] if value == positive else []
        case Atom():
            return _atom_cubes(phi, positive)
        case Not(operand):
            return _dnf(operand, not positive, limit)
        case And(operands):
            parts = [_dnf(part, positive, limit) for part in operands]
            if any(p is None for p in parts):
                return None
            return _cross(parts, limit) if positive else _union(parts, limit)
        case Or(operands):
            parts = [_dnf(part, positive, limit) for part in operands]
            if any(p is None for p in parts):
                return None
            return _union(parts, limit) if positive else _cross(parts, limit)
        case Implies(lhs, rhs):
            a = _dnf(lhs, not positive, limit)
            b = _dnf(rhs, positive, limit)
            if a is None or b is None:
                return None
            return _union([a, b], limit) if positive else _cross([a, b], limit)
        case Iff(lhs, rhs):
            pp = _dnf(And((lhs, rhs)), True, limit)
            nn = _dnf(And((Not(lhs), Not(rhs))), True, limit)
            pn = _dnf(And((lhs, Not(rhs))), True, limit)
            np = _dnf(And((Not(lhs), rhs)), True, limit)
            if any(p is None for p in (pp, nn, pn, np)):
                return None
            if positive:
                return _union([pp, nn], limit)
            return _union([pn, np], limit)
        case Quantifier():
            return None
    raise FormulaError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Cube decision: equality elimination plus shadow projection


class _Depth(Exception):
    pass


_AUX_PREFIX = "~s"


def _modhat(a: int, m: int) -> int:
    # a - m * floor(a/m + 1/2), Pugh's symmetric residue
    return a - m * ((2 * a + m) // (2 * m))


def _subst_expr(
    coeffs: dict[str, int], const: int, name: str, repl: LinExpr
) -> LinExpr:
    """Replace name by a linear expression inside coeffs/const."""
    if name not in coeffs:
        return dict(coeffs), const
    factor = coeffs[name]
    r_coeffs, r_const = repl
    out = {k: v for k, v in coeffs.items() if k != name}
    for key, value in r_coeffs.items():
        out[key] = out.get(key, 0) + factor * value
    out = {k: v for k, v in out.items() if v}
    return out, const + factor * r_const


def _eval_expr(coeffs: dict[str, int], const: int, model: Mapping[str, int]) -> int:
    return const + sum(c * model[name] for name, c in coeffs.items())


class _CubeSolver:
    """Decides one conjunction of linear atoms and produces a model."""

    def __init__(self):
        self.aux_count = 0

    def fresh_aux(self) -> str:
        self.aux_count += 1
        return f"{_AUX_PREFIX}{self.aux_count}"

    def solve(
        self, eqs: list[LinExpr], ineqs: list[LinExpr], depth: int = 0
    ) -> Assignment | None:
        """Model of (each eq == 0) and (each ineq >= 0), or None."""
        if depth > 80:
            raise _Depth()
        eqs = [({k: v for k, v in c.items() if v}, const) for c, const in eqs]
        ineqs = [({k: v for k, v in c.items() if v}, const) for c, const in ineqs]

        substitutions: list[tuple[str, LinExpr]] = []
        while eqs:
            coeffs, const = eqs.pop()
            if not coeffs:
                if const != 0:
                    return None
                continue
            divisor = 0
            for value in coeffs.values():
                divisor = gcd(divisor, abs(value))
            if const % divisor:
                return None
            coeffs = {k: v // divisor for k, v in coeffs.items()}
            const //= divisor

            unit = next((k for k, v in coeffs.items() if abs(v) == 1), None)
            if unit is not None:
                sign = coeffs[unit]
                repl_coeffs = {k: -v * sign for k, v in coeffs.items() if k != unit}
                repl = (repl_coeffs, -const * sign)
            else:
                # No unit coefficient: shrink via the symmetric residue,
                # introducing one auxiliary variable.
                pivot = min(coeffs, key=lambda k: (abs(coeffs[k]), k))
                m = abs(coeffs[pivot]) + 1
                aux = self.fresh_aux()
                hat = {k: _modhat(v, m) for k, v in coeffs.items()}
                hat_const = _modhat(const, m)
                # sum hat[k] x_k + hat_const = m * aux, and hat[pivot] = -+1
                sign = hat[pivot]
                repl_coeffs = {k: -v * sign for k, v in hat.items() if k != pivot}
                repl_coeffs[aux] = m * sign
                repl = (repl_coeffs, -hat_const * sign)
                unit = pivot
                eqs.append((coeffs, const))  # reduced below by the substitution

            substitutions.append((unit, repl))
            eqs = [_subst_expr(c, k, unit, repl) for c, k in eqs]
            ineqs = [_subst_expr(c, k, unit, repl) for c, k in ineqs]

        model = self._solve_ineqs(ineqs, depth)
        if model is None:
            return None
        for name, (coeffs, const) in reversed(substitutions):
            for key in coeffs:
                model.setdefault(key, 0)
            model[name] = _eval_expr(coeffs, const, model)
        return model

    def _solve_ineqs(self, ineqs: list[LinExpr], depth: int) -> Assignment | None:
        if depth > 80:
            raise _Depth()
        normalized: list[LinExpr] = []
        for coeffs, const in ineqs:
            coeffs = {k: v for k, v in coeffs.items() if v}
            if not coeffs:
                if const < 0:
                    return None
                continue
            divisor = 0
            for value in coeffs.values():
                divisor = gcd(divisor, abs(value))
            if divisor > 1:
                # floor keeps the integer solutions; this is the tightening step
                coeffs = {k: v // divisor for k, v in coeffs.items()}
                const = const // divisor
            normalized.append((coeffs, const))
        ineqs = normalized
        if not ineqs:
            return {}

        variables = sorted({name for coeffs, _ in ineqs for name in coeffs})
        var = self._pick_variable(ineqs, variables)

        lowers: list[tuple[int, dict[str, int], int]] = []  # a*var >= -(rest)
        uppers: list[tuple[int, dict[str, int], int]] = []  # a*var <= rest
        others: list[LinExpr] = []
        for coeffs, const in ineqs:
            a = coeffs.get(var, 0)
            rest = {k: v for k, v in coeffs.items() if k != var}
            if a > 0:
                lowers.append((a, {k: -v for k, v in rest.items()}, -const))
            elif a < 0:
                uppers.append((-a, rest, const))
            else:
                others.append((coeffs, const))

        if not lowers or not uppers:
            sub_model = self._solve_ineqs(others, depth + 1)
            if sub_model is None:
                return None
            return self._extend(sub_model, var, lowers, uppers)

        exact = all(a == 1 for a, _, _ in lowers) or all(b == 1 for b, _, _ in uppers)

        def shadow(slack: bool) -> list[LinExpr]:
            out = list(others)
            for (a, l_coeffs, l_const), (b, u_coeffs, u_const) in itertools.product(
                lowers, uppers
            ):
                coeffs = {k: a * v for k, v in u_coeffs.items()}
                for key, value in l_coeffs.items():
                    coeffs[key] = coeffs.get(key, 0) - b * value
                const = a * u_const - b * l_const
                if slack:
                    const -= (a - 1) * (b - 1)
                out.append((coeffs, const))
            return out

        if exact:
            sub_model = self._solve_ineqs(shadow(False), depth + 1)
            if sub_model is None:
                return None
            return self._extend(sub_model, var, lowers, uppers)

        sub_model = self._solve_ineqs(shadow(True), depth + 1)
        if sub_model is not None:
            return self._extend(sub_model, var, lowers, uppers)

        # Gray zone: any solution must sit close above some lower bound.
        b_max = max(b for b, _, _ in uppers)
        for a, l_coeffs, l_const in lowers:
            top = (a * b_max - a - b_max) // b_max
            for offset in range(top + 1):
                eq_coeffs = dict(l_coeffs)
                eq_coeffs[var] = eq_coeffs.get(var, 0) - a
                # a*var = L + offset  =>  L + offset - a*var = 0
                model = self.solve(
                    [(eq_coeffs, l_const + offset)], list(ineqs), depth + 1
                )
                if model is not None:
                    return model
        return None

    @staticmethod
    def _pick_variable(ineqs: list[LinExpr], variables: list[str]) -> str:
        best = None
        best_key = None
        for name in variables:
            lo = sum(1 for coeffs, _ in ineqs if coeffs.get(name, 0) > 0)
            hi = sum(1 for coeffs, _ in ineqs if coeffs.get(name, 0) < 0)
            unit = all(
                abs(coeffs.get(name, 0)) <= 1 for coeffs, _ in ineqs
            )
            key = (not unit, lo * hi if lo and hi else 0, lo + hi, name)
            if best_key is None or key < best_key:
                best, best_key = name, key
        assert best is not None
        return best

    @staticmethod
    def _extend(
        model: Assignment,
        var: str,
        lowers: list[tuple[int, dict[str, int], int]],
        uppers: list[tuple[int, dict[str, int], int]],
    ) -> Assignment:
        model = dict(model)
        for coeffs_list in (lowers, uppers):
            for _, coeffs, _ in coeffs_list:
                for name in coeffs:
                    if name not in model:
                        model[name] = 0
        lo = None
        for a, coeffs, const in lowers:
            bound = -(-_eval_expr(coeffs, const, model) // a)
            lo = bound if lo is None else max(lo, bound)
        hi = None
        for b, coeffs, const in uppers:
            bound = _eval_expr(coeffs, const, model) // b
            hi = bound if hi is None else min(hi, bound)
        if lo is not None and hi is not None and lo > hi:
            raise AssertionError("shadow projection produced an empty interval")
        model[var] = lo if lo is not None else (hi if hi is not None else 0)
        return model


def _check_cube(cube: list[LinAtom], model: Assignment) -> bool:
    for kind, coeffs, const in cube:
        value = const + sum(c * model.get(name, 0) for name, c in coeffs.items())
        if kind == "eq" and value != 0:
            return False
        if kind == "ge" and value < 0:
            return False
    return True


def builtin_check_sat(phi: Formula, dnf_limit: int = 4096) -> SolverVerdict:
    """Decide satisfiability locally; unknown only outside the fragment."""
    cubes = formula_to_cubes(phi, dnf_limit)
    if cubes is None:
        reason = (
            "quantified formula"
            if any(isinstance(p, Quantifier) for p in _walk(phi))
            else f"normal form exceeds {dnf_limit} branches"
        )
        return SolverVerdict(UNKNOWN, diagnostic=reason)
    solver = _CubeSolver()
    for cube in cubes:
        eqs = [(coeffs, const) for kind, coeffs, const in cube if kind == "eq"]
        ineqs = [(coeffs, const) for kind, coeffs, const in cube if kind == "ge"]
        try:
            model = solver.solve(eqs, ineqs)
        except _Depth:
            return SolverVerdict(UNKNOWN, diagnostic="projection depth limit")
        if model is not None:
            if not _check_cube(cube, model):
                raise AssertionError("builtin solver produced an invalid model")
            full = {name: model.get(name, 0) for name in free_vars(phi)}
            if not evaluate(phi, full):
                raise AssertionError("builtin solver model fails the formula")
            return SolverVerdict(SAT, model=full)
    return SolverVerdict(UNSAT)


def _walk(phi: Formula):
    from .formula import iter_subformulas

    return iter_subformulas(phi)


# ---------------------------------------------------------------------------
# Facade


class Solver:
    """Shared entry point for satisfiability, implication and equivalence.

    One instance owns at most one external SMT session, reused across
    queries with push/pop scoping, plus running statistics.
    """

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        self.stats = SolverStats()
        self._session = None

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        if self._session is not None:
            self._session.close()
            self._session = None

    def __enter__(self) -> "Solver":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _external(self):
        from .smtlib import SmtSession

        if self._session is None:
            self._session = SmtSession(
                command=self.config.smt_command, timeout_ms=self.config.timeout_ms
            )
        return self._session

    # -- core queries --------------------------------------------------------

    def check_sat(self, phi: Formula, want_model: bool = False) -> SolverVerdict:
        verdict = builtin_check_sat(phi, self.config.dnf_limit)
        external = False
        if verdict.is_unknown and self.config.backend == "external":
            verdict = self._external().check_sat(phi, want_model=want_model)
            external = True
        if not want_model and verdict.model is not None:
            verdict = SolverVerdict(verdict.status, diagnostic=verdict.diagnostic)
        self.stats.record(verdict, external)
        return verdict

    def check_implies(self, premise: Formula, conclusion: Formula) -> SolverVerdict:
        """Verdict on validity of premise => conclusion.

        Encoded as satisfiability of the negation: sat means the
        implication fails and the model is a counterexample; unsat means
        it holds.
        """
        return self.check_sat(And((premise, Not(conclusion))), want_model=True)

    def check_equiv(self, lhs: Formula, rhs: Formula) -> SolverVerdict:
        """Verdict on lhs <=> rhs, encoded like check_implies."""
        return self.check_sat(Not(Iff(lhs, rhs)), want_model=True)

    # -- boolean views (None = unknown) --------------------------------------

    def satisfiable(self, phi: Formula) -> bool | None:
        verdict = self.check_sat(phi)
        if verdict.is_unknown:
            return None
        return verdict.is_sat

    def implies(self, premise: Formula, conclusion: Formula) -> bool | None:
        verdict = self.check_implies(premise, conclusion)
        if verdict.is_unknown:
            return None
        return verdict.is_unsat

    def equivalent(self, lhs: Formula, rhs: Formula) -> bool | None:
        verdict = self.check_equiv(lhs, rhs)
        if verdict.is_unknown:
            return None
        return verdict.is_unsat

    def model(self, phi: Formula) -> Assignment | None:
        verdict = self.check_sat(phi, want_model=True)
        return verdict.model if verdict.is_sat else None


def default_solver() -> Solver:
    return Solver(SolverConfig())
