"""Command-line front end: analyze rule sets, apply rules, fuzz the analysis.

Exit codes: 0 success (analyze: no conflicts), 1 findings (analyze:
conflicts; apply: no match; oracle: completeness violations), 2 usage
or parse errors, 3 solver subprocess failures.
"""

from __future__ import annotations

import argparse
import shlex
import sys
import time
from pathlib import Path
from typing import Iterable, Sequence

from .category import GluingViolation
from .conflicts import classify_pair
from .oracle import OracleReport, run_oracle
from .ruleio import (
    ParseError,
    RuleSetDocument,
    format_host,
    load_ruleset,
    report_from_pairs,
    report_to_json,
)
from .smtlib import SmtError
from .solver import Solver, SolverConfig
from .symbolic import (
    Inconsistent,
    SymbolicMatch,
    apply_narrowing,
    apply_symbolic,
    find_narrowing_matches,
    find_symbolic_matches,
)
from .version import VERSION

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sygra",
        description="Symbolic graph transformation and static conflict analysis.",
    )
    parser.add_argument("--version", action="version", version=f"sygra {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    solver_flags = argparse.ArgumentParser(add_help=False)
    solver_flags.add_argument(
        "--solver",
        choices=("builtin", "external"),
        default="builtin",
        help="decision backend; 'external' escalates unknowns to an SMT process",
    )
    solver_flags.add_argument(
        "--smt-cmd",
        metavar="CMD",
        help="SMT-LIB solver command line (default: $SYGRA_SMT_CMD, "
        "then z3, then the bundled reference server)",
    )
    solver_flags.add_argument(
        "--timeout-ms",
        type=int,
        default=SolverConfig.timeout_ms,
        metavar="N",
        help="per-query time budget for the external solver",
    )
    solver_flags.add_argument(
        "--out", metavar="PATH", help="write the report here instead of stdout"
    )

    analyze = commands.add_parser(
        "analyze",
        parents=[solver_flags],
        help="classify every ordered rule pair and report conflicts",
    )
    analyze.add_argument("rules", help="rule file (.json for the JSON encoding)")
    analyze.add_argument(
        "--mode",
        choices=("narrowing", "symbolic"),
        default="narrowing",
        help="how closing steps are searched during confluence checks",
    )
    analyze.add_argument(
        "--max-fresh",
        type=int,
        default=None,
        metavar="N",
        help="cap on fresh labels a narrowing match may materialize",
    )
    analyze.add_argument(
        "--no-self", action="store_true", help="skip rule-vs-itself pairs"
    )
    analyze.add_argument(
        "--timing",
        action="store_true",
        help="include wall-clock timing (reports stop being byte-stable)",
    )
    analyze.set_defaults(handler=cmd_analyze)

    apply_cmd = commands.add_parser(
        "apply",
        parents=[solver_flags],
        help="apply one rule to one host and print the derivation trace",
    )
    apply_cmd.add_argument("rules", help="rule file with at least one host block")
    apply_cmd.add_argument("--rule", required=True, help="rule name")
    apply_cmd.add_argument("--host", required=True, help="host graph name")
    apply_cmd.add_argument(
        "--mode",
        choices=("narrowing", "symbolic"),
        default="symbolic",
        help="symbolic requires entailed matches; narrowing conjoins and checks",
    )
    apply_cmd.add_argument("--max-fresh", type=int, default=None, metavar="N")
    apply_cmd.set_defaults(handler=cmd_apply)

    oracle = commands.add_parser(
        "oracle",
        parents=[solver_flags],
        help="fuzz the static analysis against grounded brute force",
    )
    oracle.add_argument("rules", help="rule file")
    oracle.add_argument(
        "--pairs",
        metavar="A:B,C:D",
        help="ordered rule pairs to check (default: all, self-pairs included)",
    )
    oracle.add_argument("--seed", type=int, default=0, metavar="N")
    oracle.add_argument("--trials", type=int, default=100, metavar="N")
    oracle.add_argument(
        "--mode", choices=("narrowing", "symbolic"), default="narrowing"
    )
    oracle.add_argument("--max-fresh", type=int, default=None, metavar="N")
    oracle.set_defaults(handler=cmd_oracle)

    return parser


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    command = tuple(shlex.split(args.smt_cmd)) if args.smt_cmd else None
    return SolverConfig(
        backend=args.solver, smt_command=command, timeout_ms=args.timeout_ms
    )


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _ordered_pairs(doc: RuleSetDocument, include_self: bool):
    for first in doc.rules:
        for second in doc.rules:
            if include_self or first.name != second.name:
                yield first, second


def cmd_analyze(args: argparse.Namespace) -> int:
    doc = load_ruleset(args.rules)
    config = _solver_config(args)
    solver = Solver(config)
    started = time.perf_counter()
    try:
        reports = [
            classify_pair(first, second, solver, mode=args.mode, max_fresh=args.max_fresh)
            for first, second in _ordered_pairs(doc, include_self=not args.no_self)
        ]
    finally:
        solver.close()
    timing = None
    if args.timing:
        timing = {"total_ms": round((time.perf_counter() - started) * 1000.0, 1)}
    document = report_from_pairs(reports, config=config, mode=args.mode, timing=timing)
    _emit(args, report_to_json(document))
    return EXIT_FINDINGS if any(r.conflicting for r in reports) else EXIT_OK


def _match_lines(match: SymbolicMatch) -> Iterable[str]:
    for sort, keyword in (
        ("node", "node"),
        ("edge", "edge"),
        ("label", "label"),
        ("node_label", "attr"),
        ("edge_label", "eattr"),
    ):
        for source, target in sorted(match.morphism.map_for(sort).items()):
            yield f"  {keyword} {source} -> {target}"


def cmd_apply(args: argparse.Namespace) -> int:
    doc = load_ruleset(args.rules)
    try:
        rule = doc.rule(args.rule)
    except KeyError:
        raise _Usage(f"no rule named {args.rule!r} in {args.rules}")
    if args.host not in doc.hosts:
        raise _Usage(f"no host named {args.host!r} in {args.rules}")
    host = doc.hosts[args.host]
    config = _solver_config(args)
    solver = Solver(config)
    lines: list[str] = []
    try:
        if args.mode == "symbolic":
            matches = find_symbolic_matches(rule, host, solver)
        else:
            matches = find_narrowing_matches(rule, host, max_fresh=args.max_fresh)
        lines.append(
            f"apply {rule.name} to {args.host} ({args.mode}): "
            f"{len(matches)} match(es)"
        )
        for index, match in enumerate(matches, 1):
            lines.append("")
            lines.append(f"match {index}")
            lines.extend(_match_lines(match))
            if match.fresh_labels:
                lines.append(f"  fresh labels: {' '.join(match.fresh_labels)}")
            try:
                if args.mode == "symbolic":
                    step = apply_symbolic(match)
                else:
                    step = apply_narrowing(match, solver)
            except GluingViolation as exc:
                lines.append(f"  deletion blocked (gluing violation): {exc}")
                continue
            if isinstance(step, Inconsistent):
                lines.append("  narrowed formula is unsatisfiable; no derivation")
                continue
            if step.consistent is None:
                lines.append("  narrowed formula undecided; result kept")
            lines.append(format_host(f"result_{index}", step.output, indent="  "))
    finally:
        solver.close()
    text = "\n".join(lines) + "\n"
    _emit(args, text)
    return EXIT_OK if matches else EXIT_FINDINGS


def _parse_pairs(value: str) -> list[tuple[str, str]]:
    pairs = []
    for chunk in value.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        first, sep, second = chunk.partition(":")
        if not sep or not first or not second:
            raise _Usage(f"--pairs entries look like FIRST:SECOND, got {chunk!r}")
        pairs.append((first.strip(), second.strip()))
    if not pairs:
        raise _Usage("--pairs given but names no pairs")
    return pairs


def _oracle_text(report: OracleReport) -> str:
    headers = (
        "first", "second", "verdict", "pairs", "dependent",
        "non-confluent", "embedded", "divergent", "violations",
    )
    rows = [
        (
            row.first,
            row.second,
            row.verdict,
            str(row.derivation_pairs),
            str(row.dependent),
            str(row.non_confluent),
            str(row.embedded),
            str(row.divergences),
            str(row.violations),
        )
        for row in report.agreements
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        f"oracle: seed={report.seed} trials={report.trials} hosts={report.hosts}",
        "  ".join(header.ljust(widths[i]) for i, header in enumerate(headers)).rstrip(),
    ]
    lines += [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    lines.append(
        f"summary: derivation pairs={report.derivation_pairs} "
        f"non-confluent={report.non_confluent} divergent={report.divergences} "
        f"violations={len(report.violations)}"
    )
    for violation in report.violations:
        lines.append(
            f"violation: {violation.first} / {violation.second} "
            f"trial {violation.trial}: {violation.reason}"
        )
        lines.append(format_host("host", violation.host, indent="  "))
    return "\n".join(lines) + "\n"


def cmd_oracle(args: argparse.Namespace) -> int:
    doc = load_ruleset(args.rules)
    pairs = _parse_pairs(args.pairs) if args.pairs else None
    config = _solver_config(args)
    solver = Solver(config)
    try:
        try:
            report = run_oracle(
                doc.rules,
                trials=args.trials,
                seed=args.seed,
                solver=solver,
                pairs=pairs,
                mode=args.mode,
                max_fresh=args.max_fresh,
            )
        except KeyError as exc:
            raise _Usage(str(exc.args[0]) if exc.args else str(exc))
    finally:
        solver.close()
    _emit(args, _oracle_text(report))
    return EXIT_OK if report.ok else EXIT_FINDINGS


class _Usage(Exception):
    """A command-level usage error (unknown names, bad flag values)."""


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"sygra: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"sygra: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except _Usage as exc:
        print(f"sygra: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SmtError as exc:
        print(f"sygra: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
