"""SMT-LIB v2.6 client over a solver subprocess.

One session owns one solver process. Queries are scoped with push/pop
so the process is reused: each check declares its variables inside a
fresh frame, asserts the formula, reads the check-sat answer and
optionally a model, then pops the frame.

The solver command comes from explicit configuration, the SYGRA_SMT_CMD
environment variable, a ``z3`` binary on PATH, or finally the bundled
reference server (``python -m sygra.smtserver``). Launch failures and
protocol violations raise; a timeout kills the process, yields an
unknown verdict with a diagnostic, and the next query relaunches.
"""

from __future__ import annotations

import os
import re
import select
import shlex
import shutil
import subprocess
import sys
import time

from .formula import (
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
    free_vars,
)
from .solver import SAT, UNKNOWN, UNSAT, SolverVerdict


class SmtError(Exception):
    """Base class for external-backend failures."""


class SmtLaunchError(SmtError):
    """The solver process could not be started."""


class SmtProtocolError(SmtError):
    """The solver sent something the protocol does not allow."""


_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/-][0-9A-Za-z~!@$%^&*_+=<>.?/-]*$")


def smt_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    if "|" in name or "\\" in name:
        raise SmtError(f"variable name {name!r} cannot be quoted for SMT-LIB")
    return f"|{name}|"


def emit_term(term: Term) -> str:
    match term:
        case Var(name):
            return smt_symbol(name)
        case Lit(value):
            return str(value) if value >= 0 else f"(- {-value})"
        case Add(lhs, rhs):
            return f"(+ {emit_term(lhs)} {emit_term(rhs)})"
        case Mul(coeff, operand):
            coeff_text = str(coeff) if coeff >= 0 else f"(- {-coeff})"
            return f"(* {coeff_text} {emit_term(operand)})"
    raise FormulaError(f"not a term: {term!r}")


def emit_formula(phi: Formula) -> str:
    match phi:
        case Truth(value):
            return "true" if value else "false"
        case Atom(op, lhs, rhs):
            return f"({op} {emit_term(lhs)} {emit_term(rhs)})"
        case Not(operand):
            return f"(not {emit_formula(operand)})"
        case And(operands):
            return f"(and {' '.join(emit_formula(part) for part in operands)})"
        case Or(operands):
            return f"(or {' '.join(emit_formula(part) for part in operands)})"
        case Implies(lhs, rhs):
            return f"(=> {emit_formula(lhs)} {emit_formula(rhs)})"
        case Iff(lhs, rhs):
            return f"(= {emit_formula(lhs)} {emit_formula(rhs)})"
        case Quantifier(kind, names, body):
            bindings = " ".join(f"({smt_symbol(name)} Int)" for name in names)
            return f"({kind} ({bindings}) {emit_formula(body)})"
    raise FormulaError(f"not a formula: {phi!r}")


def default_command() -> tuple[str, ...]:
    env = os.environ.get("SYGRA_SMT_CMD")
    if env:
        return tuple(shlex.split(env))
    if shutil.which("z3"):
        return ("z3", "-in")
    return (sys.executable, "-m", "sygra.smtserver")


# -- s-expression reading ----------------------------------------------------


def tokenize_sexpr(text: str) -> list[str]:
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
            while end < len(text):
                if text[end] == '"':
                    if end + 1 < len(text) and text[end + 1] == '"':
                        end += 2
                        continue
                    break
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


def parse_sexpr(tokens: list[str], start: int = 0):
    """Parse one s-expression, returning (tree, next index)."""
    token = tokens[start]
    if token == "(":
        items = []
        index = start + 1
        while tokens[index] != ")":
            item, index = parse_sexpr(tokens, index)
            items.append(item)
        return items, index + 1
    if token == ")":
        raise SmtProtocolError("unbalanced parenthesis in solver output")
    return token, start + 1


def _strip_pipes(symbol: str) -> str:
    if symbol.startswith("|") and symbol.endswith("|"):
        return symbol[1:-1]
    return symbol


def _model_value(tree) -> int:
    if isinstance(tree, str):
        return int(tree)
    if isinstance(tree, list) and len(tree) == 2 and tree[0] == "-":
        return -_model_value(tree[1])
    raise SmtProtocolError(f"cannot read model value {tree!r}")


def parse_model(tree) -> dict[str, int]:
    if isinstance(tree, list) and tree and tree[0] == "model":
        tree = tree[1:]
    model: dict[str, int] = {}
    if not isinstance(tree, list):
        raise SmtProtocolError(f"unexpected model shape {tree!r}")
    for entry in tree:
        if (
            isinstance(entry, list)
            and len(entry) == 5
            and entry[0] == "define-fun"
            and entry[2] == []
            and entry[3] == "Int"
        ):
            model[_strip_pipes(entry[1])] = _model_value(entry[4])
    return model


# -- the session --------------------------------------------------------------


class SmtSession:
    """Incremental SMT-LIB session against one solver process."""

    def __init__(
        self,
        command: tuple[str, ...] | None = None,
        timeout_ms: int = 10_000,
    ):
        self.command = tuple(command) if command else default_command()
        self.timeout_ms = timeout_ms
        self._proc: subprocess.Popen | None = None
        self._buffer = b""

    # -- process management -------------------------------------------------

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                )
            except OSError as exc:
                raise SmtLaunchError(
                    f"cannot launch SMT solver {' '.join(self.command)}: {exc}"
                ) from exc
            self._buffer = b""
            self._send("(set-option :print-success false)")
            self._send("(set-option :produce-models true)")
            self._send("(set-logic LIA)")
        return self._proc

    def close(self) -> None:
        if self._proc is not None:
            try:
                if self._proc.poll() is None:
                    self._proc.stdin.write(b"(exit)\n")
                    self._proc.stdin.flush()
                    self._proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
            finally:
                self._proc = None
                self._buffer = b""

    def _kill(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc = None
        self._buffer = b""

    def __enter__(self) -> "SmtSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- i/o ------------------------------------------------------------------

    def _send(self, line: str) -> None:
        proc = self._proc
        assert proc is not None
        try:
            proc.stdin.write(line.encode("utf-8") + b"\n")
            proc.stdin.flush()
        except OSError as exc:
            self._kill()
            raise SmtProtocolError(f"solver pipe closed while writing: {exc}") from exc

    def _read_line(self, deadline: float) -> str:
        # select() must pair with raw fd reads: a buffered stream can hold
        # data internally while the kernel side of the pipe looks empty.
        proc = self._proc
        assert proc is not None
        fd = proc.stdout.fileno()
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = self._buffer[:newline].decode("utf-8").strip()
                self._buffer = self._buffer[newline + 1 :]
                if line:
                    return line
                continue
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError()
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise SmtProtocolError("solver closed its output stream")
            self._buffer += chunk

    def _read_sexpr(self, deadline: float):
        text = ""
        while True:
            text += self._read_line(deadline) + "\n"
            depth = 0
            balanced = True
            in_pipe = False
            for char in text:
                if char == "|":
                    in_pipe = not in_pipe
                elif not in_pipe:
                    if char == "(":
                        depth += 1
                    elif char == ")":
                        depth -= 1
            if depth == 0:
                break
        tree, _ = parse_sexpr(tokenize_sexpr(text))
        return tree

    # -- queries ---------------------------------------------------------------

    def check_sat(self, phi: Formula, want_model: bool = False) -> SolverVerdict:
        self._ensure()
        deadline = time.monotonic() + self.timeout_ms / 1000.0
        try:
            self._send("(push 1)")
            for name in sorted(free_vars(phi)):
                self._send(f"(declare-const {smt_symbol(name)} Int)")
            self._send(f"(assert {emit_formula(phi)})")
            self._send("(check-sat)")
            answer = self._read_line(deadline)
            if answer.startswith("(error"):
                raise SmtProtocolError(f"solver error: {answer}")
            if answer not in (SAT, UNSAT, UNKNOWN):
                raise SmtProtocolError(f"unexpected check-sat answer {answer!r}")
            model = None
            if answer == SAT and want_model:
                self._send("(get-model)")
                tree = self._read_sexpr(deadline)
                model = parse_model(tree)
                model = {k: model.get(k, 0) for k in free_vars(phi)}
            self._send("(pop 1)")
            return SolverVerdict(answer, model=model)
        except TimeoutError:
            self._kill()
            return SolverVerdict(
                UNKNOWN,
                diagnostic=f"external solver timeout after {self.timeout_ms} ms",
            )
