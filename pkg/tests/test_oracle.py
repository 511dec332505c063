"""Randomized grounded completeness harness for the static analyzer.

The headline run freezes a full-pool fuzz at a fixed seed: every
grounded non-confluent derivation pair must be covered by an embedded
conflict entry. Frozen tallies were captured once with
``scratch/freeze_oracle.py`` and pin the generator, the grounded
confluence decision, and the embedding check all at once.
"""

from random import Random

import pytest

from pool import fuzz_pool, paper_rules
from sygra import run_oracle
from sygra.oracle import random_grounded_host

CONFLICTING_POOL_PAIRS = {
    "addLoop/delNode",
    "copyAttr/delNode",
    "delNode/addLoop",
    "delNode/copyAttr",
    "delNode/delNode",
    "delNode/guard3",
    "delNode/inc1",
    "delNode/inc2",
    "delNode/setZero",
    "guard3/delNode",
    "guard3/guard3",
    "guard3/inc1",
    "guard3/inc2",
    "guard3/setZero",
    "inc1/delNode",
    "inc1/guard3",
    "inc1/setZero",
    "inc2/delNode",
    "inc2/guard3",
    "inc2/setZero",
    "setZero/delNode",
    "setZero/guard3",
    "setZero/inc1",
    "setZero/inc2",
}


def _rows(report):
    return {(row.first, row.second): row for row in report.agreements}


def test_forty_trial_fuzz_finds_no_completeness_violations(shared_solver):
    report = run_oracle(fuzz_pool(), trials=40, seed=7, solver=shared_solver)
    assert report.ok
    assert report.violations == ()
    assert report.hosts == 40
    assert report.derivation_pairs == 5137
    assert report.non_confluent == 585
    assert report.divergences == 59

    rows = _rows(report)
    reset = rows[("inc1", "setZero")]
    assert (
        reset.derivation_pairs,
        reset.dependent,
        reset.non_confluent,
        reset.embedded,
        reset.divergences,
    ) == (117, 63, 63, 63, 4)
    guard = rows[("guard3", "guard3")]
    assert guard.verdict == "conflicting"
    assert (
        guard.derivation_pairs,
        guard.dependent,
        guard.non_confluent,
        guard.embedded,
        guard.divergences,
    ) == (36, 26, 26, 26, 9)
    delete = rows[("delNode", "delNode")]
    assert (
        delete.derivation_pairs,
        delete.dependent,
        delete.non_confluent,
        delete.embedded,
        delete.divergences,
    ) == (13, 11, 11, 11, 2)

    for (first, second), row in rows.items():
        assert row.derivation_pairs >= row.dependent >= row.non_confluent
        assert row.non_confluent == row.embedded + row.violations
        assert row.divergences <= row.non_confluent
        if row.embedded:
            assert row.verdict == "conflicting"
        mirror = rows[(second, first)]
        assert (
            row.derivation_pairs,
            row.dependent,
            row.non_confluent,
            row.embedded,
            row.divergences,
            row.violations,
        ) == (
            mirror.derivation_pairs,
            mirror.dependent,
            mirror.non_confluent,
            mirror.embedded,
            mirror.divergences,
            mirror.violations,
        )


def test_commuting_increment_rules_never_diverge(shared_solver):
    inc1, inc2, _ = paper_rules()
    report = run_oracle([inc1, inc2], trials=100, seed=11, solver=shared_solver)
    assert report.ok
    assert report.derivation_pairs == 1697
    assert report.non_confluent == 0
    assert report.divergences == 0
    expected = {
        ("inc1", "inc1"): (423, 189),
        ("inc1", "inc2"): (416, 180),
        ("inc2", "inc1"): (416, 180),
        ("inc2", "inc2"): (442, 210),
    }
    for key, row in _rows(report).items():
        assert row.verdict == "non-conflicting"
        assert (row.derivation_pairs, row.dependent) == expected[key]
        assert row.non_confluent == 0


def test_pair_selection_restricts_the_run(shared_solver):
    report = run_oracle(
        fuzz_pool(),
        trials=12,
        seed=3,
        pairs=[("inc1", "setZero"), ("guard3", "guard3")],
        solver=shared_solver,
    )
    assert report.ok
    rows = _rows(report)
    assert set(rows) == {("inc1", "setZero"), ("guard3", "guard3")}
    reset = rows[("inc1", "setZero")]
    assert (
        reset.derivation_pairs,
        reset.dependent,
        reset.non_confluent,
        reset.embedded,
        reset.divergences,
    ) == (36, 19, 19, 19, 0)
    guard = rows[("guard3", "guard3")]
    assert (
        guard.derivation_pairs,
        guard.dependent,
        guard.non_confluent,
        guard.embedded,
        guard.divergences,
    ) == (24, 14, 14, 14, 6)

    with pytest.raises(KeyError):
        run_oracle(
            fuzz_pool(), trials=1, pairs=[("inc1", "noSuchRule")], solver=shared_solver
        )


def test_zero_trials_reports_static_verdicts_only(shared_solver):
    report = run_oracle(fuzz_pool(), trials=0, seed=0, solver=shared_solver)
    assert report.ok
    assert report.hosts == 0
    assert report.derivation_pairs == 0
    assert len(report.agreements) == 64
    conflicting = {
        f"{row.first}/{row.second}"
        for row in report.agreements
        if row.verdict == "conflicting"
    }
    assert conflicting == CONFLICTING_POOL_PAIRS
    flipped = {"/".join(reversed(name.split("/"))) for name in conflicting}
    assert flipped == conflicting


def test_random_hosts_are_small_grounded_and_deduplicate_values():
    first = [random_grounded_host(Random(seed)) for seed in range(50)]
    second = [random_grounded_host(Random(seed)) for seed in range(50)]
    assert first == second
    for host in first:
        assert host.is_grounded()
        graph = host.egraph
        assert 1 <= len(graph.nodes) <= 4
        assert len(graph.node_labels) + len(graph.edge_labels) <= 3
        values = list(host.constants.values())
        assert len(set(values)) == len(values)
        assert all(value in range(6) for value in values)
        for _, (_, _, tag) in graph.node_labels.items():
            assert tag == "val"
        for _, (_, _, tag) in graph.edge_labels.items():
            assert tag == "w"
