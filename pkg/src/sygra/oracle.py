"""Grounded brute-force reference for validating the static analysis.

The static analyzer promises: whenever two derivations on *any*
grounded host interfere and cannot be joined back together within one
step, the rule pair's report contains a conflict entry that embeds into
those derivations. This module generates random grounded hosts,
enumerates actual derivation pairs on them, decides their confluence by
exhaustive closing-step search with grounded isomorphism, and checks
the promise case by case. It is deliberately value-level and
per-instance — the opposite end of the telescope from the symbolic
rule-level analysis it validates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Mapping, Sequence

from .category import GluingViolation
from .egraph import EGraph
from .solver import Solver
from .symbolic import (
    Derivation,
    Rule,
    SymbolicGraph,
    apply_symbolic,
    constant_name,
    find_symbolic_matches,
)
from .conflicts import (
    NCP_PAIR,
    PairReport,
    check_direct_confluence,
    classify_pair,
    embeds,
    is_parallel_dependent,
)


@dataclass(frozen=True)
class PairAgreement:
    """Oracle-vs-analysis tallies for one ordered rule pair."""

    first: str
    second: str
    verdict: str
    derivation_pairs: int = 0
    dependent: int = 0
    non_confluent: int = 0
    embedded: int = 0
    violations: int = 0
    divergences: int = 0


@dataclass(frozen=True)
class Violation:
    """A grounded conflict the static analysis failed to cover."""

    first: str
    second: str
    trial: int
    host: SymbolicGraph
    reason: str


@dataclass(frozen=True)
class OracleReport:
    """Outcome of a randomized completeness run.

    ``violations`` is the headline: grounded non-confluent derivation
    pairs for which no reported conflict entry embeds. ``divergences``
    counts pairs joinable only by ignoring the tracking condition —
    they are still treated as conflicts, and surfaced separately
    because the two confluence readings disagree on them.
    """

    seed: int
    trials: int
    hosts: int
    agreements: tuple[PairAgreement, ...]
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def derivation_pairs(self) -> int:
        return sum(row.derivation_pairs for row in self.agreements)

    @property
    def non_confluent(self) -> int:
        return sum(row.non_confluent for row in self.agreements)

    @property
    def divergences(self) -> int:
        return sum(row.divergences for row in self.agreements)


def random_grounded_host(
    rng: Random,
    *,
    max_nodes: int = 4,
    max_edges: int = 3,
    max_attrs: int = 3,
    values: Sequence[int] = range(6),
    node_tags: Sequence[str] = ("val",),
    edge_tags: Sequence[str] = ("w",),
) -> SymbolicGraph:
    """A small random grounded host graph.

    Equal attribute values share one pinned label node, mirroring how
    grounding collapses constants. Node and edge attribute edges are
    tagged from the given alphabets.
    """
    node_count = rng.randint(1, max_nodes)
    nodes = [f"n{i}" for i in range(node_count)]
    edges = {}
    for i in range(rng.randint(0, max_edges)):
        edges[f"e{i}"] = (rng.choice(nodes), rng.choice(nodes))
    used_values: dict[int, str] = {}
    node_labels = {}
    edge_labels = {}
    for i in range(rng.randint(0, max_attrs)):
        value = rng.choice(list(values))
        name = used_values.setdefault(value, constant_name(value))
        if edges and rng.random() < 0.25:
            edge_labels[f"ea{i}"] = (rng.choice(sorted(edges)), name, rng.choice(list(edge_tags)))
        else:
            node_labels[f"a{i}"] = (rng.choice(nodes), name, rng.choice(list(node_tags)))
    graph = EGraph(
        nodes=nodes,
        edges=edges,
        label_nodes=sorted(used_values.values()),
        node_labels=node_labels,
        edge_labels=edge_labels,
    )
    return SymbolicGraph(
        egraph=graph,
        constants={name: value for value, name in used_values.items()},
    )


def grounded_derivations(rule: Rule, host: SymbolicGraph, solver: Solver) -> list[Derivation]:
    """Every application of the rule on the grounded host.

    Matches whose deletion is blocked are skipped: the derivation does
    not exist there.
    """
    derivations = []
    for match in find_symbolic_matches(rule, host, solver):
        try:
            derivations.append(apply_symbolic(match))
        except GluingViolation:
            continue
    return derivations


def run_oracle(
    rules: Sequence[Rule],
    *,
    trials: int,
    seed: int = 0,
    solver: Solver | None = None,
    pairs: Iterable[tuple[str, str]] | None = None,
    max_nodes: int = 4,
    max_attrs: int = 3,
    values: Sequence[int] = range(6),
    mode: str = "narrowing",
    max_fresh: int | None = None,
) -> OracleReport:
    """Randomized completeness check of the static analysis.

    Per trial: generate a grounded host, enumerate every derivation
    pair for every selected ordered rule pair (self-pairs included),
    and for each parallel-dependent pair decide grounded direct
    confluence by exhaustive one-step closing search. Every
    non-confluent grounded pair must be covered by a conflict entry of
    the (cached) static classification via an embedding; anything else
    is recorded as a violation. Pairs joinable only without the
    tracking condition count as divergences and remain conflicts.
    """
    own_solver = solver is None
    solver = solver if solver is not None else Solver()
    by_name = {rule.name: rule for rule in rules}
    if pairs is None:
        selected = [
            (a.name, b.name) for a in rules for b in rules
        ]
    else:
        selected = [(a, b) for a, b in pairs]
        for a, b in selected:
            if a not in by_name or b not in by_name:
                raise KeyError(f"unknown rule in pair {(a, b)!r}")
    try:
        reports: dict[tuple[str, str], PairReport] = {}
        counters = {
            pair: {"derivation_pairs": 0, "dependent": 0, "non_confluent": 0,
                   "embedded": 0, "violations": 0, "divergences": 0}
            for pair in selected
        }
        violations: list[Violation] = []
        rng = Random(seed)
        hosts = 0
        for trial in range(trials):
            host = random_grounded_host(
                rng, max_nodes=max_nodes, max_attrs=max_attrs, values=values
            )
            hosts += 1
            derivations = {
                name: grounded_derivations(rule, host, solver)
                for name, rule in by_name.items()
            }
            for pair in selected:
                first_name, second_name = pair
                tally = counters[pair]
                for d1, d2 in itertools.product(
                    derivations[first_name], derivations[second_name]
                ):
                    tally["derivation_pairs"] += 1
                    if not is_parallel_dependent(d1, d2):
                        continue
                    tally["dependent"] += 1
                    tracked = check_direct_confluence(d1, d2, solver, mode="symbolic")
                    if tracked:
                        continue
                    loose = check_direct_confluence(
                        d1, d2, solver, mode="symbolic", tracking=False
                    )
                    if loose:
                        tally["divergences"] += 1
                    tally["non_confluent"] += 1
                    if pair not in reports:
                        reports[pair] = classify_pair(
                            by_name[first_name],
                            by_name[second_name],
                            solver,
                            mode=mode,
                            max_fresh=max_fresh,
                        )
                    report = reports[pair]
                    covered = False
                    for entry in report.conflicts:
                        if embeds(
                            (entry.first_derivation, entry.second_derivation),
                            (d1, d2),
                            solver,
                        ):
                            covered = True
                            break
                    if covered:
                        tally["embedded"] += 1
                    else:
                        tally["violations"] += 1
                        reason = (
                            "no conflict entry embeds"
                            if report.conflicts
                            else "no conflict entry reported"
                        )
                        violations.append(
                            Violation(
                                first=first_name,
                                second=second_name,
                                trial=trial,
                                host=host,
                                reason=reason,
                            )
                        )
        for pair in selected:
            if pair not in reports:
                reports[pair] = classify_pair(
                    by_name[pair[0]], by_name[pair[1]], solver,
                    mode=mode, max_fresh=max_fresh,
                )
        agreements = tuple(
            PairAgreement(
                first=pair[0],
                second=pair[1],
                verdict=reports[pair].verdict,
                **counters[pair],
            )
            for pair in selected
        )
        return OracleReport(
            seed=seed,
            trials=trials,
            hosts=hosts,
            agreements=agreements,
            violations=tuple(violations),
        )
    finally:
        if own_solver:
            solver.close()
