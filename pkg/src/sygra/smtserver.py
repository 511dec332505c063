"""Reference SMT-LIB v2.6 server for quantifier-free linear integer arithmetic.

Speaks enough of the SMT-LIB command language on stdin/stdout to serve
as an external solver process: set-logic, set-option, declare-const,
declare-fun (arity 0), assert, push/pop, check-sat, get-model, get-info,
echo, reset, exit. Used as the fallback backend when no system SMT
solver is installed, and in tests as an independent cross-check of the
builtin decision procedure.

The engine is deliberately different from the builtin one: equalities
are eliminated by extended-gcd parametrization (each equation's solution
set is rewritten over fresh parameters), and the remaining inequalities
are decided by exact rational Fourier-Motzkin elimination with
branch and bound on fractional sample coordinates. Assertions outside
the supported fragment (quantifiers, non-linear terms) make check-sat
answer ``unknown`` rather than guessing.

Run with ``python -m sygra.smtserver`` or the ``sygra-smt`` script.
"""

from __future__ import annotations

import re
import sys
from fractions import Fraction
from math import gcd

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/-][0-9A-Za-z~!@$%^&*_+=<>.?/-]*$")

_BB_DEPTH_LIMIT = 120
_DNF_LIMIT = 20_000


class _ServerError(Exception):
    """Protocol-level error reported to the client as (error ...)."""


class _Unsupported(Exception):
    """Assertion outside the decidable fragment; check-sat says unknown."""


# -- s-expression front end ----------------------------------------------------


def _tokenize(text: str) -> list[str]:
    tokens = []
    index = 0
    while index < len(text):
        char = text[index]
        if char.isspace():
            index += 1
        elif char in "()":
            tokens.append(char)
            index += 1
        elif char == "|":
            end = text.index("|", index + 1)
            tokens.append(text[index : end + 1])
            index = end + 1
        elif char == '"':
            end = index + 1
            while end < len(text) and text[end] != '"':
                end += 1
            tokens.append(text[index : end + 1])
            index = end + 1
        elif char == ";":
            while index < len(text) and text[index] != "\n":
                index += 1
        else:
            end = index
            while end < len(text) and not text[end].isspace() and text[end] not in '()|";':
                end += 1
            tokens.append(text[index:end])
            index = end
    return tokens


def _parse(tokens: list[str], start: int):
    token = tokens[start]
    if token == "(":
        items = []
        index = start + 1
        while index < len(tokens) and tokens[index] != ")":
            item, index = _parse(tokens, index)
            items.append(item)
        if index >= len(tokens):
            raise _ServerError("unbalanced input")
        return items, index + 1
    if token == ")":
        raise _ServerError("unbalanced input")
    return token, start + 1


def _name(symbol: str) -> str:
    if symbol.startswith("|") and symbol.endswith("|"):
        return symbol[1:-1]
    return symbol


# -- linear terms ----------------------------------------------------------------

# A linear term is (coeffs, const) with integer coefficients keyed by
# variable name; an atom is ("=", expr) for expr = 0 or (">=", expr)
# for expr >= 0.


def _lin_add(a, b):
    coeffs = dict(a[0])
    for var, coeff in b[0].items():
        updated = coeffs.get(var, 0) + coeff
        if updated:
            coeffs[var] = updated
        else:
            coeffs.pop(var, None)
    return coeffs, a[1] + b[1]


def _lin_scale(a, factor: int):
    if factor == 0:
        return {}, 0
    return {var: coeff * factor for var, coeff in a[0].items()}, a[1] * factor


def _lin_neg(a):
    return _lin_scale(a, -1)


def _lin_is_const(a) -> bool:
    return not a[0]


class _Engine:
    """Decides conjunctions of linear integer constraints."""

    def __init__(self):
        self.fresh = 0

    def _param(self) -> str:
        self.fresh += 1
        return f" p{self.fresh}"

    # -- equality elimination by extended-gcd parametrization ----------------

    def _eliminate_equalities(self, eqs, ineqs):
        """Rewrite the system without equalities.

        Returns (ineqs, substitutions) where substitutions maps each
        eliminated variable to a linear expression over the remaining
        ones, in elimination order, or None when the equalities alone
        are inconsistent.
        """
        eqs = [eq for eq in eqs]
        subs: list[tuple[str, tuple]] = []

        def substitute_everywhere(var, expr):
            nonlocal eqs, ineqs
            def sub_one(lin):
                coeff = lin[0].get(var)
                if not coeff:
                    return lin
                trimmed = {v: c for v, c in lin[0].items() if v != var}
                return _lin_add((trimmed, lin[1]), _lin_scale(expr, coeff))
            eqs = [sub_one(eq) for eq in eqs]
            ineqs = [sub_one(iq) for iq in ineqs]
            subs.append((var, expr))

        while eqs:
            coeffs, const = eqs.pop()
            coeffs = {v: c for v, c in coeffs.items() if c}
            if not coeffs:
                if const != 0:
                    return None
                continue
            if len(coeffs) == 1:
                ((var, coeff),) = coeffs.items()
                if const % coeff != 0:
                    return None
                substitute_everywhere(var, ({}, -const // coeff))
                continue
            divisor = 0
            for coeff in coeffs.values():
                divisor = gcd(divisor, coeff)
            if const % divisor != 0:
                return None
            if divisor != 1:
                coeffs = {v: c // divisor for v, c in coeffs.items()}
                const //= divisor
            unit = next((v for v, c in sorted(coeffs.items()) if abs(c) == 1), None)
            if unit is not None:
                sign = coeffs[unit]
                rest = {v: -c * sign for v, c in coeffs.items() if v != unit}
                substitute_everywhere(unit, (rest, -const * sign))
                continue
            # Combine two variables into one by Bezout: for a·x + b·y
            # with gcd g, every solution is x = p·g·u + (b/g)·t,
            # y = q·g·u − (a/g)·t — here written with u carrying the
            # combined coefficient so the equation keeps shrinking.
            (x, a), (y, b) = sorted(coeffs.items())[:2]
            g, p, q = _ext_gcd(a, b)
            u = self._param()
            t = self._param()
            expr_x = ({u: p, t: b // g}, 0)
            expr_y = ({u: q, t: -(a // g)}, 0)
            remainder = {v: c for v, c in coeffs.items() if v not in (x, y)}
            remainder[u] = g
            eqs.append((remainder, const))
            substitute_everywhere(x, expr_x)
            substitute_everywhere(y, expr_y)
        return ineqs, subs

    # -- rational Fourier-Motzkin with integer branch and bound --------------

    def _fm_sample(self, ineqs):
        """Rational feasibility check.

        Returns a rational sample point (possibly empty) when the
        relaxation is feasible, None when it is not.
        """
        ineqs = [
            ({v: Fraction(c) for v, c in lin[0].items() if c}, Fraction(lin[1]))
            for lin in ineqs
        ]
        order = sorted({v for lin in ineqs for v in lin[0]})
        eliminated = []
        for var in order:
            lowers, uppers, rest = [], [], []
            for coeffs, const in ineqs:
                coeff = coeffs.get(var)
                if not coeff:
                    if not coeffs:
                        if const < 0:
                            return None
                        continue
                    rest.append((coeffs, const))
                    continue
                others = {v: c for v, c in coeffs.items() if v != var}
                # coeff·var + others + const >= 0
                bound = ({v: -c / coeff for v, c in others.items()}, -const / coeff)
                if coeff > 0:
                    lowers.append(bound)  # var >= bound
                else:
                    uppers.append(bound)  # var <= bound
            for lo in lowers:
                for up in uppers:
                    diff = _lin_add(up, _lin_neg(lo))  # up - lo >= 0
                    trimmed = {v: c for v, c in diff[0].items() if c}
                    if not trimmed:
                        if diff[1] < 0:
                            return None
                    else:
                        rest.append((trimmed, diff[1]))
            eliminated.append((var, lowers, uppers))
            ineqs = rest
        for coeffs, const in ineqs:
            if not coeffs and const < 0:
                return None
        sample: dict[str, Fraction] = {}

        def eval_bound(bound):
            coeffs, const = bound
            return sum(sample[v] * c for v, c in coeffs.items()) + const

        for var, lowers, uppers in reversed(eliminated):
            low = max((eval_bound(b) for b in lowers), default=None)
            high = min((eval_bound(b) for b in uppers), default=None)
            if low is not None and high is not None and low > high:
                return None
            if low is None and high is None:
                sample[var] = Fraction(0)
            elif low is None:
                # unbounded below: largest integer under the ceiling
                sample[var] = Fraction(high.numerator // high.denominator)
            elif high is None:
                sample[var] = Fraction(-((-low.numerator) // low.denominator))
            else:
                # prefer an integer point inside the interval when one exists
                floor_high = high.numerator // high.denominator
                if Fraction(floor_high) >= low:
                    sample[var] = Fraction(floor_high)
                else:
                    sample[var] = (low + high) / 2
        return sample

    def _branch(self, ineqs, depth: int):
        if depth > _BB_DEPTH_LIMIT:
            raise _Unsupported("branch and bound depth limit")
        sample = self._fm_sample(ineqs)
        if sample is None:
            return None
        fractional = next(
            (
                (var, value)
                for var, value in sorted(sample.items())
                if value.denominator != 1
            ),
            None,
        )
        if fractional is None:
            return {var: int(value) for var, value in sample.items()}
        var, value = fractional
        floor = value.numerator // value.denominator
        # x <= floor(v): floor - x >= 0
        below = self._branch(ineqs + [({var: -1}, floor)], depth + 1)
        if below is not None:
            return below
        # x >= floor(v)+1: x - floor - 1 >= 0
        return self._branch(ineqs + [({var: 1}, -(floor + 1))], depth + 1)

    def solve_cube(self, atoms):
        """Decide one conjunction of linear atoms; model dict or None."""
        eqs, ineqs = [], []
        for kind, lin in atoms:
            if kind == "=":
                eqs.append(lin)
            else:
                ineqs.append(lin)
        outcome = self._eliminate_equalities(eqs, ineqs)
        if outcome is None:
            return None
        ineqs, subs = outcome
        model = self._branch(ineqs, 0)
        if model is None:
            return None
        for var, expr in reversed(subs):
            total = expr[1]
            for other, coeff in expr[0].items():
                total += coeff * model.setdefault(other, 0)
            model[var] = total
        return model


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, p, q) with p*a + q*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_p, p = 1, 0
    old_q, q = 0, 1
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_p, p = p, old_p - quotient * p
        old_q, q = q, old_q - quotient * q
    if old_r < 0:
        old_r, old_p, old_q = -old_r, -old_p, -old_q
    return old_r, old_p, old_q


# -- SMT-LIB term/formula translation -------------------------------------------


def _term_to_lin(tree, declared: set[str]):
    if isinstance(tree, str):
        if tree.lstrip("-").isdigit():
            return {}, int(tree)
        name = _name(tree)
        if name not in declared:
            raise _ServerError(f"undeclared symbol {tree}")
        return {name: 1}, 0
    if not tree:
        raise _ServerError("empty application")
    head = tree[0]
    args = tree[1:]
    if head == "+":
        total = ({}, 0)
        for arg in args:
            total = _lin_add(total, _term_to_lin(arg, declared))
        return total
    if head == "-":
        if len(args) == 1:
            return _lin_neg(_term_to_lin(args[0], declared))
        total = _term_to_lin(args[0], declared)
        for arg in args[1:]:
            total = _lin_add(total, _lin_neg(_term_to_lin(arg, declared)))
        return total
    if head == "*":
        parts = [_term_to_lin(arg, declared) for arg in args]
        constant = 1
        symbolic = None
        for part in parts:
            if _lin_is_const(part):
                constant *= part[1]
            elif symbolic is None:
                symbolic = part
            else:
                raise _Unsupported("non-linear multiplication")
        if symbolic is None:
            return {}, constant
        return _lin_scale(symbolic, constant)
    raise _Unsupported(f"unsupported term {head}")


def _is_term(tree, declared: set[str]) -> bool:
    if isinstance(tree, str):
        return tree.lstrip("-").isdigit() or _name(tree) in declared
    return bool(tree) and tree[0] in ("+", "-", "*")


def _formula_to_nnf(tree, declared: set[str], positive: bool):
    """Translate to ("and"|"or", parts) trees over ("atom", kind, lin) leaves."""
    if isinstance(tree, str):
        if tree == "true":
            return ("const", positive)
        if tree == "false":
            return ("const", not positive)
        raise _Unsupported(f"boolean symbol {tree}")
    if not tree:
        raise _ServerError("empty application")
    head = tree[0]
    args = tree[1:]
    if head == "not":
        (arg,) = args
        return _formula_to_nnf(arg, declared, not positive)
    if head in ("and", "or"):
        gate = head if positive else ("or" if head == "and" else "and")
        return (gate, [_formula_to_nnf(arg, declared, positive) for arg in args])
    if head == "=>":
        *premises, conclusion = args
        parts = [_formula_to_nnf(p, declared, not positive) for p in premises]
        parts.append(_formula_to_nnf(conclusion, declared, positive))
        return ("or" if positive else "and", parts)
    if head in ("forall", "exists"):
        raise _Unsupported("quantifier")
    if head in ("<=", "<", ">=", ">", "="):
        if head == "=" and not all(_is_term(arg, declared) for arg in args):
            if len(args) != 2:
                raise _Unsupported("n-ary boolean equality")
            lhs, rhs = args
            both = ("and", [
                _formula_to_nnf(["=>", lhs, rhs], declared, True),
                _formula_to_nnf(["=>", rhs, lhs], declared, True),
            ])
            if positive:
                return both
            return ("or", [
                ("and", [
                    _formula_to_nnf(lhs, declared, True),
                    _formula_to_nnf(rhs, declared, False),
                ]),
                ("and", [
                    _formula_to_nnf(lhs, declared, False),
                    _formula_to_nnf(rhs, declared, True),
                ]),
            ])
        if len(args) != 2:
            raise _Unsupported("chained comparison")
        lhs = _term_to_lin(args[0], declared)
        rhs = _term_to_lin(args[1], declared)
        diff = _lin_add(rhs, _lin_neg(lhs))  # rhs - lhs
        if head == "=":
            if positive:
                return ("atom", "=", diff)
            # lhs != rhs: lhs < rhs or lhs > rhs
            less = _lin_add(diff, ({}, -1))      # rhs - lhs - 1 >= 0
            greater = _lin_add(_lin_neg(diff), ({}, -1))
            return ("or", [("atom", ">=", less), ("atom", ">=", greater)])
        if head == ">":
            head, diff = "<", _lin_neg(diff)
        elif head == ">=":
            head, diff = "<=", _lin_neg(diff)
        if head == "<":
            diff = _lin_add(diff, ({}, -1))  # lhs < rhs <=> rhs - lhs - 1 >= 0
        if not positive:
            diff = _lin_add(_lin_neg(diff), ({}, -1))
        return ("atom", ">=", diff)
    raise _Unsupported(f"unsupported operator {head}")


def _nnf_to_cubes(tree) -> list[list[tuple]]:
    kind = tree[0]
    if kind == "const":
        return [[]] if tree[1] else []
    if kind == "atom":
        return [[(tree[1], tree[2])]]
    if kind == "and":
        cubes = [[]]
        for part in tree[1]:
            grown = []
            for left in cubes:
                for right in _nnf_to_cubes(part):
                    grown.append(left + right)
                    if len(grown) + len(cubes) > _DNF_LIMIT:
                        raise _Unsupported("distribution limit")
            cubes = grown
            if not cubes:
                return []
        return cubes
    if kind == "or":
        cubes = []
        for part in tree[1]:
            cubes.extend(_nnf_to_cubes(part))
            if len(cubes) > _DNF_LIMIT:
                raise _Unsupported("distribution limit")
        return cubes
    raise _ServerError(f"bad nnf node {kind}")


# -- the server ------------------------------------------------------------------


class _Frame:
    def __init__(self):
        self.declared: list[str] = []
        self.assertions: list = []


class SmtServer:
    def __init__(self, stdin=None, stdout=None):
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout
        self.frames = [_Frame()]
        self.print_success = True
        self.last_model: dict[str, int] | None = None
        self.last_status: str | None = None

    # -- plumbing -----------------------------------------------------------

    def _reply(self, text: str) -> None:
        self.stdout.write(text + "\n")
        self.stdout.flush()

    def _success(self) -> None:
        if self.print_success:
            self._reply("success")

    def _declared(self) -> set[str]:
        return {name for frame in self.frames for name in frame.declared}

    def _assertions(self) -> list:
        return [tree for frame in self.frames for tree in frame.assertions]

    # -- command handlers -----------------------------------------------------

    def handle(self, command) -> bool:
        """Execute one command; False once the client asked to exit."""
        if not isinstance(command, list) or not command:
            raise _ServerError("expected a command")
        head = command[0]
        args = command[1:]
        if head == "exit":
            self._success()
            return False
        if head in ("set-logic", "set-info", "reset-assertions"):
            if head == "reset-assertions":
                self.frames = [_Frame()]
            self._success()
        elif head == "reset":
            self.frames = [_Frame()]
            self.print_success = True
            self.last_model = None
            self.last_status = None
            self._success()
        elif head == "set-option":
            if len(args) == 2 and args[0] == ":print-success":
                self.print_success = args[1] == "true"
            self._success()
        elif head in ("declare-const", "declare-fun"):
            if head == "declare-fun" and args[1:2] != [[]]:
                raise _ServerError("only arity-0 functions are supported")
            sort = args[-1]
            if sort != "Int":
                raise _ServerError(f"unsupported sort {sort}")
            self.frames[-1].declared.append(_name(args[0]))
            self._success()
        elif head == "assert":
            if len(args) != 1:
                raise _ServerError("assert takes one formula")
            self.frames[-1].assertions.append(args[0])
            self._success()
        elif head == "push":
            count = int(args[0]) if args else 1
            for _ in range(count):
                self.frames.append(_Frame())
            self._success()
        elif head == "pop":
            count = int(args[0]) if args else 1
            if count >= len(self.frames):
                raise _ServerError("pop below the initial frame")
            for _ in range(count):
                self.frames.pop()
            self._success()
        elif head == "check-sat":
            self._reply(self._check_sat())
        elif head == "get-model":
            if self.last_status != "sat" or self.last_model is None:
                raise _ServerError("no model is available")
            entries = "".join(
                f"\n  (define-fun {_quote(name)} () Int {_value(value)})"
                for name, value in sorted(self.last_model.items())
            )
            self._reply(f"({entries}\n)" if entries else "()")
        elif head == "get-info":
            key = args[0] if args else ":name"
            if key == ":name":
                self._reply('(:name "sygra-smt")')
            elif key == ":version":
                self._reply('(:version "0.1.0")')
            else:
                self._reply(f"({key} unsupported)")
        elif head == "echo":
            self._reply(args[0] if args else '""')
        else:
            raise _ServerError(f"unsupported command {head}")
        return True

    def _check_sat(self) -> str:
        declared = self._declared()
        engine = _Engine()
        try:
            tree = ("and", [
                _formula_to_nnf(assertion, declared, True)
                for assertion in self._assertions()
            ])
            cubes = _nnf_to_cubes(tree)
        except _Unsupported:
            self.last_status = "unknown"
            self.last_model = None
            return "unknown"
        saw_unknown = False
        for cube in cubes:
            try:
                model = engine.solve_cube(cube)
            except _Unsupported:
                saw_unknown = True
                continue
            if model is not None:
                self.last_status = "sat"
                self.last_model = {name: model.get(name, 0) for name in declared}
                return "sat"
        self.last_status = "unknown" if saw_unknown else "unsat"
        self.last_model = None
        return self.last_status

    # -- main loop --------------------------------------------------------------

    def serve(self) -> None:
        buffer = ""
        depth = 0
        in_pipe = False
        in_string = False
        while True:
            chunk = self.stdin.readline()
            if chunk == "":
                return
            for char in chunk:
                buffer += char
                if in_string:
                    if char == '"':
                        in_string = False
                elif in_pipe:
                    if char == "|":
                        in_pipe = False
                elif char == '"':
                    in_string = True
                elif char == "|":
                    in_pipe = True
                elif char == "(":
                    depth += 1
                elif char == ")":
                    depth -= 1
                    if depth == 0:
                        if not self._dispatch(buffer):
                            return
                        buffer = ""
            if depth == 0 and buffer.strip():
                self._dispatch(buffer)
                buffer = ""

    def _dispatch(self, text: str) -> bool:
        text = text.strip()
        if not text:
            return True
        try:
            tree, _ = _parse(_tokenize(text), 0)
            return self.handle(tree)
        except _ServerError as exc:
            self._reply(f'(error "{exc}")')
        except (ValueError, IndexError) as exc:
            self._reply(f'(error "malformed input: {exc}")')
        return True


def _quote(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    return f"|{name}|"


def _value(value: int) -> str:
    return str(value) if value >= 0 else f"(- {-value})"


def main() -> int:
    SmtServer().serve()
    return 0


if __name__ == "__main__":
    sys.exit(main())
