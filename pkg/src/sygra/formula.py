"""First-order formulas over linear integer arithmetic.

Formulas constrain the label variables of symbolic graphs. Terms are
linear by construction: the only multiplication node is a scalar multiple
with a literal integer coefficient, so nonlinear products are not
representable. Connectives cover conjunction, disjunction, negation,
implication and equivalence; quantifiers are representable in the tree
but only the solver backends interpret them.

The concrete syntax accepted by :func:`parse_formula` (and emitted by
:func:`format_formula`) is a small infix language::

    formula  := iff
    iff      := implies ("<=>" implies)*          right associative
    implies  := or ("=>" or)*                     right associative
    or       := and (("||" | "∨") and)*
    and      := not (("&&" | "∧") not)*
    not      := ("!" | "¬") not | comparison
    compare  := term (("=" | "<=" | "<" | ">=" | ">") term)?
    term     := product (("+" | "-") product)*
    product  := factor ("*" factor)*              one side must be a literal
    factor   := "-" factor | integer | identifier | "true" | "false"
               | "(" formula ")"

Identifiers start with a letter, underscore or ``$``, may contain ``~``
(which renaming uses for disambiguation suffixes), and may end in a run
of apostrophes (``x'``, ``x''``). ``>=`` and ``>`` are accepted and
normalised to the mirrored ``<=`` / ``<`` forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union


class FormulaError(ValueError):
    """Base class for malformed formulas and invalid operations."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.message = message
        self.position = position


class CaptureError(FormulaError):
    """Substitution would move a free variable under a binder."""


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Lit(Term):
    value: int


@dataclass(frozen=True, slots=True)
class Add(Term):
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class Mul(Term):
    """Scalar multiple. The coefficient is a plain integer, never a term."""

    coeff: int
    operand: Term


def mul(coeff: int, operand: Term) -> Term:
    """Build a scalar multiple, folding literals and nested multiples."""
    if isinstance(operand, Lit):
        return Lit(coeff * operand.value)
    if isinstance(operand, Mul):
        return mul(coeff * operand.coeff, operand.operand)
    if coeff == 0:
        return Lit(0)
    if coeff == 1:
        return operand
    return Mul(coeff, operand)


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)

COMPARISONS = ("=", "<=", "<")


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    op: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise FormulaError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True, slots=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True, slots=True)
class Quantifier(Formula):
    kind: str  # "forall" | "exists"
    names: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        if self.kind not in ("forall", "exists"):
            raise FormulaError(f"unknown quantifier {self.kind!r}")


def eq(lhs: Term, rhs: Term) -> Atom:
    return Atom("=", lhs, rhs)


def le(lhs: Term, rhs: Term) -> Atom:
    return Atom("<=", lhs, rhs)


def lt(lhs: Term, rhs: Term) -> Atom:
    return Atom("<", lhs, rhs)


# ---------------------------------------------------------------------------
# Structural operations


def term_vars(term: Term) -> frozenset[str]:
    match term:
        case Var(name):
            return frozenset((name,))
        case Lit():
            return frozenset()
        case Add(lhs, rhs):
            return term_vars(lhs) | term_vars(rhs)
        case Mul(_, operand):
            return term_vars(operand)
    raise FormulaError(f"not a term: {term!r}")


def free_vars(phi: Formula) -> frozenset[str]:
    match phi:
        case Truth():
            return frozenset()
        case Atom(_, lhs, rhs):
            return term_vars(lhs) | term_vars(rhs)
        case Not(operand):
            return free_vars(operand)
        case And(operands) | Or(operands):
            out: frozenset[str] = frozenset()
            for part in operands:
                out |= free_vars(part)
            return out
        case Implies(lhs, rhs) | Iff(lhs, rhs):
            return free_vars(lhs) | free_vars(rhs)
        case Quantifier(_, names, body):
            return free_vars(body) - frozenset(names)
    raise FormulaError(f"not a formula: {phi!r}")


Substitution = Mapping[str, Union[Term, str, int]]


def _as_term(value: Union[Term, str, int]) -> Term:
    if isinstance(value, Term):
        return value
    if isinstance(value, str):
        return Var(value)
    if isinstance(value, int):
        return Lit(value)
    raise FormulaError(f"cannot use {value!r} as a substitution target")


def substitute_term(term: Term, mapping: Mapping[str, Term]) -> Term:
    match term:
        case Var(name):
            return mapping.get(name, term)
        case Lit():
            return term
        case Add(lhs, rhs):
            return Add(substitute_term(lhs, mapping), substitute_term(rhs, mapping))
        case Mul(coeff, operand):
            return mul(coeff, substitute_term(operand, mapping))
    raise FormulaError(f"not a term: {term!r}")


def substitute(phi: Formula, mapping: Substitution) -> Formula:
    """Replace free variables, refusing substitutions that capture.

    Mapping values may be terms, variable names or integers. Bound
    variables shadow the mapping inside their scope; a substitution whose
    replacement term mentions a bound name raises :class:`CaptureError`.
    """
    terms = {name: _as_term(value) for name, value in mapping.items()}
    return _substitute(phi, terms)


def _substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    match phi:
        case Truth():
            return phi
        case Atom(op, lhs, rhs):
            return Atom(op, substitute_term(lhs, mapping), substitute_term(rhs, mapping))
        case Not(operand):
            return Not(_substitute(operand, mapping))
        case And(operands):
            return And(tuple(_substitute(part, mapping) for part in operands))
        case Or(operands):
            return Or(tuple(_substitute(part, mapping) for part in operands))
        case Implies(lhs, rhs):
            return Implies(_substitute(lhs, mapping), _substitute(rhs, mapping))
        case Iff(lhs, rhs):
            return Iff(_substitute(lhs, mapping), _substitute(rhs, mapping))
        case Quantifier(kind, names, body):
            bound = frozenset(names)
            inner = {k: v for k, v in mapping.items() if k not in bound}
            relevant = frozenset(inner) & free_vars(body)
            for name in relevant:
                clash = term_vars(inner[name]) & bound
                if clash:
                    raise CaptureError(
                        f"substituting {name} would capture {sorted(clash)}"
                    )
            return Quantifier(kind, names, _substitute(body, inner))
    raise FormulaError(f"not a formula: {phi!r}")


def rename(phi: Formula, mapping: Mapping[str, str]) -> Formula:
    return substitute(phi, {k: Var(v) for k, v in mapping.items()})


def evaluate_term(term: Term, assignment: Mapping[str, int]) -> int:
    match term:
        case Var(name):
            if name not in assignment:
                raise FormulaError(f"unbound variable {name!r}")
            return assignment[name]
        case Lit(value):
            return value
        case Add(lhs, rhs):
            return evaluate_term(lhs, assignment) + evaluate_term(rhs, assignment)
        case Mul(coeff, operand):
            return coeff * evaluate_term(operand, assignment)
    raise FormulaError(f"not a term: {term!r}")


def evaluate(phi: Formula, assignment: Mapping[str, int]) -> bool:
    """Evaluate a quantifier-free formula under a total assignment."""
    match phi:
        case Truth(value):
            return value
        case Atom(op, lhs, rhs):
            a = evaluate_term(lhs, assignment)
            b = evaluate_term(rhs, assignment)
            if op == "=":
                return a == b
            if op == "<=":
                return a <= b
            return a < b
        case Not(operand):
            return not evaluate(operand, assignment)
        case And(operands):
            return all(evaluate(part, assignment) for part in operands)
        case Or(operands):
            return any(evaluate(part, assignment) for part in operands)
        case Implies(lhs, rhs):
            return (not evaluate(lhs, assignment)) or evaluate(rhs, assignment)
        case Iff(lhs, rhs):
            return evaluate(lhs, assignment) == evaluate(rhs, assignment)
        case Quantifier():
            raise FormulaError("evaluate does not interpret quantifiers")
    raise FormulaError(f"not a formula: {phi!r}")


def conjoin(parts: Iterable[Formula]) -> Formula:
    """Conjunction that flattens nested conjunctions and drops true units."""
    flat: list[Formula] = []

    def collect(phi: Formula) -> None:
        if isinstance(phi, And):
            for part in phi.operands:
                collect(part)
        elif phi == TRUE:
            return
        else:
            flat.append(phi)

    for part in parts:
        collect(part)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def _ground_atom(phi: Atom) -> Formula:
    if term_vars(phi.lhs) or term_vars(phi.rhs):
        return phi
    return TRUE if evaluate(phi, {}) else FALSE


def simplify(phi: Formula) -> Formula:
    """Apply equivalence-preserving cleanups: constant folding of ground
    atoms, true/false units, duplicate removal, double negation."""
    match phi:
        case Truth():
            return phi
        case Atom():
            return _ground_atom(phi)
        case Not(operand):
            inner = simplify(operand)
            if inner == TRUE:
                return FALSE
            if inner == FALSE:
                return TRUE
            if isinstance(inner, Not):
                return inner.operand
            return Not(inner)
        case And(operands):
            parts: list[Formula] = []
            for part in operands:
                part = simplify(part)
                if part == FALSE:
                    return FALSE
                if part == TRUE or part in parts:
                    continue
                if isinstance(part, And):
                    parts.extend(p for p in part.operands if p not in parts)
                else:
                    parts.append(part)
            if not parts:
                return TRUE
            if len(parts) == 1:
                return parts[0]
            return And(tuple(parts))
        case Or(operands):
            parts = []
            for part in operands:
                part = simplify(part)
                if part == TRUE:
                    return TRUE
                if part == FALSE or part in parts:
                    continue
                if isinstance(part, Or):
                    parts.extend(p for p in part.operands if p not in parts)
                else:
                    parts.append(part)
            if not parts:
                return FALSE
            if len(parts) == 1:
                return parts[0]
            return Or(tuple(parts))
        case Implies(lhs, rhs):
            a, b = simplify(lhs), simplify(rhs)
            if a == TRUE:
                return b
            if a == FALSE or b == TRUE:
                return TRUE
            if b == FALSE:
                return simplify(Not(a))
            if a == b:
                return TRUE
            return Implies(a, b)
        case Iff(lhs, rhs):
            a, b = simplify(lhs), simplify(rhs)
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            if a == FALSE:
                return simplify(Not(b))
            if b == FALSE:
                return simplify(Not(a))
            if a == b:
                return TRUE
            return Iff(a, b)
        case Quantifier(kind, names, body):
            inner = simplify(body)
            if isinstance(inner, Truth):
                return inner
            return Quantifier(kind, names, inner)
    raise FormulaError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<int>\d+)
      | (?P<name>[A-Za-z_$][A-Za-z0-9_$~]*'*)
      | (?P<op><=>|=>|<=|>=|&&|\|\||[∧∨¬!()=<>+\-*])
    )""",
    re.VERBOSE,
)

_CANON = {"∧": "&&", "∨": "||", "¬": "!"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == m.start():
            tail = text[pos:]
            rest = tail.lstrip()
            if not rest:
                break
            raise FormulaSyntaxError(
                f"unexpected character {rest[0]!r}", pos + len(tail) - len(rest)
            )
        pos = m.end()
        start = m.start(m.lastgroup)
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int"), start))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), start))
        else:
            op = _CANON.get(m.group("op"), m.group("op"))
            tokens.append(("op", op, start))
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def take(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, op: str) -> None:
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            raise FormulaSyntaxError(f"expected {op!r}, found {value!r}", pos)

    def at_op(self, *ops: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value in ops

    def formula(self) -> Formula:
        lhs = self.implication()
        if self.at_op("<=>"):
            self.take()
            return Iff(lhs, self.formula())
        return lhs

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.at_op("=>"):
            self.take()
            return Implies(lhs, self.implication())
        return lhs

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.at_op("||"):
            self.take()
            parts.append(self.conjunction())
        if len(parts) == 1:
            return parts[0]
        return Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.negation()]
        while self.at_op("&&"):
            self.take()
            parts.append(self.negation())
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def negation(self) -> Formula:
        if self.at_op("!"):
            self.take()
            return Not(self.negation())
        kind, value, _ = self.peek()
        if kind == "name" and value in ("true", "false"):
            self.take()
            return TRUE if value == "true" else FALSE
        return self.comparison()

    def comparison(self) -> Formula:
        # A parenthesized group may be a formula or a term; resolve by
        # trying the formula reading first and backtracking on failure or
        # on operators that only make sense after a term.
        start = self.index
        if self.at_op("("):
            try:
                self.take()
                inner = self.formula()
                self.expect_op(")")
                if self.at_op("=", "<=", "<", ">=", ">", "+", "-", "*"):
                    self.index = start
                else:
                    return inner
            except FormulaSyntaxError:
                self.index = start
        lhs = self.term()
        if self.at_op("=", "<=", "<", ">=", ">"):
            _, op, _ = self.take()
            rhs = self.term()
            if op == ">=":
                return Atom("<=", rhs, lhs)
            if op == ">":
                return Atom("<", rhs, lhs)
            return Atom(op, lhs, rhs)
        kind, value, pos = self.peek()
        raise FormulaSyntaxError(
            f"expected a comparison after term, found {value or 'end of input'!r}", pos
        )

    def term(self) -> Term:
        lhs = self.product()
        while self.at_op("+", "-"):
            _, op, _ = self.take()
            rhs = self.product()
            lhs = Add(lhs, rhs if op == "+" else mul(-1, rhs))
        return lhs

    def product(self) -> Term:
        lhs = self.factor()
        while self.at_op("*"):
            _, _, pos = self.take()
            rhs = self.factor()
            if isinstance(lhs, Lit):
                lhs = mul(lhs.value, rhs)
            elif isinstance(rhs, Lit):
                lhs = mul(rhs.value, lhs)
            else:
                raise FormulaSyntaxError(
                    "multiplication requires a literal coefficient", pos
                )
        return lhs

    def factor(self) -> Term:
        kind, value, pos = self.take()
        if kind == "int":
            return Lit(int(value))
        if kind == "name":
            if value == "true" or value == "false":
                raise FormulaSyntaxError(f"{value} is not a term", pos)
            return Var(value)
        if kind == "op" and value == "-":
            return mul(-1, self.factor())
        if kind == "op" and value == "(":
            inner = self.term()
            self.expect_op(")")
            return inner
        raise FormulaSyntaxError(f"expected a term, found {value!r}", pos)

def parse_formula(text: str) -> Formula:
    """Parse the infix syntax documented in the module docstring."""
    parser = _Parser(text)
    result = parser.formula()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"trailing input {value!r}", pos)
    return result


_TERM_PREC = {"add": 1, "mul": 2, "atom": 3}


def format_term(term: Term) -> str:
    return _fmt_term(term, 0)


def _fmt_term(term: Term, parent: int) -> str:
    match term:
        case Var(name):
            return name
        case Lit(value):
            text, prec = str(value), _TERM_PREC["atom" if value >= 0 else "mul"]
        case Add(lhs, rhs):
            left = _fmt_term(lhs, _TERM_PREC["add"])
            if isinstance(rhs, Lit) and rhs.value < 0:
                text = f"{left} - {-rhs.value}"
            elif isinstance(rhs, Mul) and rhs.coeff < 0:
                text = f"{left} - {_fmt_term(mul(-rhs.coeff, rhs.operand), _TERM_PREC['add'] + 1)}"
            else:
                text = f"{left} + {_fmt_term(rhs, _TERM_PREC['add'] + 1)}"
            prec = _TERM_PREC["add"]
        case Mul(coeff, operand):
            text = f"{coeff}*{_fmt_term(operand, _TERM_PREC['mul'] + 1)}"
            if coeff == -1:
                text = f"-{_fmt_term(operand, _TERM_PREC['mul'] + 1)}"
            prec = _TERM_PREC["mul"]
        case _:
            raise FormulaError(f"not a term: {term!r}")
    if prec < parent:
        return f"({text})"
    return text


_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "not": 5, "atom": 6}


def format_formula(phi: Formula) -> str:
    """Render a formula in the concrete syntax; inverse of parse_formula
    on parser-produced trees."""
    return _fmt(phi, 0)


def _fmt(phi: Formula, parent: int) -> str:
    match phi:
        case Truth(value):
            text, prec = ("true" if value else "false"), _PREC["atom"]
        case Atom(op, lhs, rhs):
            text = f"{format_term(lhs)} {op} {format_term(rhs)}"
            prec = _PREC["atom"]
        case Not(operand):
            inner = _fmt(operand, _PREC["not"])
            if isinstance(operand, Atom):
                inner = f"({inner})"
            text, prec = f"!{inner}", _PREC["not"]
        case And(operands):
            text = " && ".join(_fmt(part, _PREC["and"] + 1) for part in operands)
            prec = _PREC["and"]
        case Or(operands):
            text = " || ".join(_fmt(part, _PREC["or"] + 1) for part in operands)
            prec = _PREC["or"]
        case Implies(lhs, rhs):
            text = f"{_fmt(lhs, _PREC['implies'] + 1)} => {_fmt(rhs, _PREC['implies'])}"
            prec = _PREC["implies"]
        case Iff(lhs, rhs):
            text = f"{_fmt(lhs, _PREC['iff'] + 1)} <=> {_fmt(rhs, _PREC['iff'])}"
            prec = _PREC["iff"]
        case Quantifier(kind, names, body):
            text = f"{kind} {', '.join(names)} . {_fmt(body, _PREC['iff'])}"
            prec = _PREC["iff"]
        case _:
            raise FormulaError(f"not a formula: {phi!r}")
    if prec < parent:
        return f"({text})"
    return text


def iter_subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    match phi:
        case Not(operand):
            yield from iter_subformulas(operand)
        case And(operands) | Or(operands):
            for part in operands:
                yield from iter_subformulas(part)
        case Implies(lhs, rhs) | Iff(lhs, rhs):
            yield from iter_subformulas(lhs)
            yield from iter_subformulas(rhs)
        case Quantifier(_, _, body):
            yield from iter_subformulas(body)


def has_quantifier(phi: Formula) -> bool:
    return any(isinstance(part, Quantifier) for part in iter_subformulas(phi))
