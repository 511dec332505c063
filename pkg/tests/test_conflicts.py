"""Static conflict analysis: overlaps, dependence, confluence, classification.

Reference values in this file were computed once with the scripts under
``scratch/`` and frozen; the suite asserts the analysis reproduces them
exactly, alongside structural invariants that must hold for any input.
"""

from collections import Counter

import pytest

from pool import add_loop_rule, del_node_rule, fuzz_pool, grounded_host, paper_rules
from sygra import (
    CLASSIFICATIONS,
    ConflictAnalysisError,
    check_direct_confluence,
    classify_pair,
    embeds,
    enumerate_overlaps,
    find_symbolic_matches,
    format_formula,
    substitute,
)
from sygra.egraph import MONO_SPEC
from sygra.formula import Iff, Not
from sygra.smtlib import SmtSession
from sygra.symbolic import apply_symbolic

SORT_NAMES = ("node", "edge", "label", "node_label", "edge_label")

INCREMENT_OVERLAPS = [
    (("node", "n", "m"),),
    (("node", "n", "m"), ("label", "x", "y")),
    (("node", "n", "m"), ("label", "x", "y"), ("label", "x2", "y2")),
    (
        ("node", "n", "m"),
        ("label", "x", "y"),
        ("label", "x2", "y2"),
        ("node_label", "inc1_del", "inc2_del"),
    ),
    (("node", "n", "m"), ("label", "x", "y"), ("node_label", "inc1_del", "inc2_del")),
    (("node", "n", "m"), ("label", "x", "y2")),
    (("node", "n", "m"), ("label", "x", "y2"), ("label", "x2", "y")),
    (("node", "n", "m"), ("label", "x2", "y")),
    (("node", "n", "m"), ("label", "x2", "y2")),
]

RESET_CONFLICT_OVERLAPS = [
    (
        ("node", "n", "p"),
        ("label", "x", "z"),
        ("label", "x2", "z2"),
        ("node_label", "inc1_del", "setZero_del"),
    ),
    (("node", "n", "p"), ("label", "x", "z"), ("node_label", "inc1_del", "setZero_del")),
]


@pytest.fixture(scope="module")
def rules():
    inc1, inc2, set_zero = paper_rules()
    pool = {rule.name: rule for rule in fuzz_pool()}
    return {**pool, "inc1": inc1, "inc2": inc2, "setZero": set_zero}


@pytest.fixture(scope="module")
def increment_report(rules, shared_solver):
    return classify_pair(rules["inc1"], rules["inc2"], shared_solver)


@pytest.fixture(scope="module")
def reset_report(rules, shared_solver):
    return classify_pair(rules["inc1"], rules["setZero"], shared_solver)


@pytest.fixture(scope="module")
def grounded_steps(rules, shared_solver):
    host = grounded_host(42)
    steps = {}
    for name in ("inc1", "inc2", "setZero", "addLoop"):
        matches = find_symbolic_matches(rules[name], host, shared_solver)
        assert len(matches) == 1
        steps[name] = apply_symbolic(matches[0])
    return steps


def _joint_image(candidate):
    image = set()
    for morphism in (candidate.o1, candidate.o2):
        for sort in SORT_NAMES:
            image.update((sort, name) for name in morphism.map_for(sort).values())
    return image


def test_increment_overlap_enumeration_is_exhaustive_and_canonical(rules):
    candidates = enumerate_overlaps(rules["inc1"], rules["inc2"])
    assert [c.merged for c in candidates] == [tuple(m) for m in INCREMENT_OVERLAPS]
    for candidate in candidates:
        assert ("node", "n", "m") in candidate.merged
        assert _joint_image(candidate) == set(candidate.sk.egraph.elements())
        assert candidate.o1.satisfies(MONO_SPEC)
        assert candidate.o2.satisfies(MONO_SPEC)
    assert format_formula(candidates[2].sk.formula) == "x2 = x + 1 && x2 = x + 2"
    assert format_formula(candidates[4].sk.formula) == "x2 = x + 1 && y2 = x + 2"
    again = enumerate_overlaps(rules["inc1"], rules["inc2"])
    assert [c.merged for c in again] == [c.merged for c in candidates]


def test_small_self_overlap_counts_match_hand_enumeration():
    loop = add_loop_rule()
    assert [c.merged for c in enumerate_overlaps(loop, loop)] == [(("node", "p", "p"),)]
    delete = del_node_rule()
    assert [c.merged for c in enumerate_overlaps(delete, delete)] == [
        (("node", "q", "q"),),
        (("node", "q", "q"), ("label", "v", "v")),
        (("node", "q", "q"), ("label", "v", "v"), ("node_label", "q_del", "q_del")),
    ]


def test_increment_pair_is_non_conflicting(increment_report):
    report = increment_report
    assert report.verdict == "non-conflicting"
    assert not report.conflicting
    assert report.conflicts == ()
    assert report.gluing_skipped == 0
    assert Counter(e.classification for e in report.entries) == {
        "ParallelIndependent": 5,
        "FormulaUnsatisfiable": 3,
        "DirectlyConfluent": 1,
    }
    by_merged = {e.candidate.merged: e.classification for e in report.entries}
    assert by_merged[tuple(INCREMENT_OVERLAPS[2])] == "FormulaUnsatisfiable"
    assert by_merged[tuple(INCREMENT_OVERLAPS[4])] == "DirectlyConfluent"


def test_contradictory_joint_formulas_short_circuit(increment_report):
    unsat = [
        e for e in increment_report.entries if e.classification == "FormulaUnsatisfiable"
    ]
    assert [e.candidate.merged for e in unsat] == [
        tuple(INCREMENT_OVERLAPS[2]),
        tuple(INCREMENT_OVERLAPS[3]),
        tuple(INCREMENT_OVERLAPS[6]),
    ]
    for entry in unsat:
        assert entry.first_derivation is None
        assert entry.confluence is None


def test_confluence_witness_carries_closers_and_isomorphism(increment_report):
    entry = next(
        e for e in increment_report.entries if e.classification == "DirectlyConfluent"
    )
    assert entry.dependence.dependent
    outcome = entry.confluence
    assert outcome
    assert (outcome.first_closers, outcome.second_closers) == (1, 1)
    assert not outcome.indeterminate
    witness = outcome.witness
    assert witness.first_closer.kind == "narrowing"
    assert witness.second_closer.kind == "narrowing"
    assert witness.first_closer.fresh_labels == ("y2~2",)
    assert witness.second_closer.fresh_labels == ("y2~2",)
    assert (
        format_formula(witness.first_closer.output.full_formula())
        == "x2 = x + 1 && y2 = x + 2 && y2~2 = x2 + 2"
    )
    assert (
        format_formula(witness.second_closer.output.full_formula())
        == "x2 = x + 1 && y2 = x + 2 && y2~2 = y2 + 1"
    )
    assert dict(witness.iso.label_map) == {
        "x": "x",
        "x2": "x2",
        "y2": "y2",
        "y2~2": "y2~2",
    }
    assert witness.track_first is not None
    assert witness.track_second is not None


def test_joined_formulas_agree_under_both_solver_backends(increment_report, shared_solver):
    witness = next(
        e for e in increment_report.entries if e.classification == "DirectlyConfluent"
    ).confluence.witness
    first = witness.first_closer.output.full_formula()
    second = witness.second_closer.output.full_formula()
    translated = substitute(first, dict(witness.iso.label_map))
    assert shared_solver.equivalent(second, translated) is True
    session = SmtSession()
    try:
        verdict = session.check_sat(Not(Iff(second, translated)))
    finally:
        session.close()
    assert verdict.is_unsat


def test_entailment_mode_cannot_close_variable_attributes(increment_report, shared_solver):
    entry = next(
        e for e in increment_report.entries if e.classification == "DirectlyConfluent"
    )
    outcome = check_direct_confluence(
        entry.first_derivation, entry.second_derivation, shared_solver, mode="symbolic"
    )
    assert not outcome
    assert (outcome.first_closers, outcome.second_closers) == (0, 0)
    assert not outcome.indeterminate


def test_increment_versus_reset_is_conflicting(reset_report):
    report = reset_report
    assert report.verdict == "conflicting"
    assert report.conflicting
    assert report.gluing_skipped == 0
    assert Counter(e.classification for e in report.entries) == {
        "ParallelIndependent": 7,
        "NcpPair": 2,
    }
    assert [e.candidate.merged for e in report.conflicts] == [
        tuple(m) for m in RESET_CONFLICT_OVERLAPS
    ]
    for entry in report.conflicts:
        assert entry.dependence.dependent
        assert entry.dependence.first_blocked == (("node_label", "inc1_del"),)
        assert entry.dependence.second_blocked == (("node_label", "inc1_del"),)
        outcome = entry.confluence
        assert not outcome
        assert (outcome.first_closers, outcome.second_closers) == (2, 1)


def test_verdicts_are_order_symmetric(rules, shared_solver):
    for first, second, expected in (
        ("inc1", "setZero", "conflicting"),
        ("inc1", "inc2", "non-conflicting"),
    ):
        forward = classify_pair(rules[first], rules[second], shared_solver)
        backward = classify_pair(rules[second], rules[first], shared_solver)
        assert forward.verdict == expected
        assert backward.verdict == expected
        assert Counter(e.classification for e in forward.entries) == Counter(
            e.classification for e in backward.entries
        )


def test_grounded_steps_interfere_with_named_evidence(grounded_steps):
    from sygra import is_parallel_dependent

    d1, d2 = grounded_steps["inc1"], grounded_steps["inc2"]
    assert dict(d1.output.constants) == {"c42": 42, "c43": 43}
    assert dict(d2.output.constants) == {"c42": 42, "c44": 44}
    verdict = is_parallel_dependent(d1, d2)
    assert verdict.dependent
    assert verdict.first_blocked == (("node_label", "h"),)
    assert verdict.second_blocked == (("node_label", "h"),)
    assert verdict.residual_first is None
    assert verdict.residual_second is None

    harmless = is_parallel_dependent(d1, grounded_steps["addLoop"])
    assert not harmless.dependent
    assert harmless.first_blocked == ()
    assert harmless.second_blocked == ()
    assert harmless.residual_first is not None
    assert harmless.residual_second is not None


def test_grounded_increments_join_in_one_extra_step(grounded_steps, shared_solver):
    d1, d2 = grounded_steps["inc1"], grounded_steps["inc2"]
    outcome = check_direct_confluence(d1, d2, shared_solver, mode="symbolic")
    assert outcome
    assert (outcome.first_closers, outcome.second_closers) == (1, 1)
    witness = outcome.witness
    joined = {"c42": 42, "c43": 43, "c44": 44, "c45": 45}
    assert dict(witness.first_closer.output.constants) == joined
    assert dict(witness.second_closer.output.constants) == joined
    assert dict(witness.iso.label_map) == {"c45": "c45"}
    assert sorted(witness.apex.elements()) == [
        ("label", "c42"),
        ("label", "c43"),
        ("label", "c44"),
        ("node", "u"),
    ]
    assert witness.track_first is not None
    assert witness.track_second is not None


def test_grounded_divergence_is_detected_despite_closers(grounded_steps, shared_solver):
    outcome = check_direct_confluence(
        grounded_steps["inc1"], grounded_steps["setZero"], shared_solver, mode="symbolic"
    )
    assert not outcome
    assert not outcome.indeterminate
    assert (outcome.first_closers, outcome.second_closers) == (2, 1)


def test_minimal_pairs_embed_into_grounded_pairs(
    increment_report, reset_report, grounded_steps, shared_solver
):
    confluent = next(
        e for e in increment_report.entries if e.classification == "DirectlyConfluent"
    )
    d1, d2, dz = (
        grounded_steps["inc1"],
        grounded_steps["inc2"],
        grounded_steps["setZero"],
    )
    found = embeds(
        (confluent.first_derivation, confluent.second_derivation), (d1, d2), shared_solver
    )
    assert found is not None
    assert dict(found.f.label_map) == {"x": "c42", "x2": "c43", "y2": "c44"}
    assert dict(found.f.map_for("node")) == {"n": "u"}

    merged_results, plain = reset_report.conflicts
    assert (
        embeds((merged_results.first_derivation, merged_results.second_derivation),
               (d1, dz), shared_solver)
        is None
    )
    witness = embeds(
        (plain.first_derivation, plain.second_derivation), (d1, dz), shared_solver
    )
    assert witness is not None
    assert dict(witness.f.label_map) == {"x": "c42", "x2": "c43", "z2": "c0"}

    mismatched = embeds(
        (plain.first_derivation, plain.second_derivation), (d1, d2), shared_solver
    )
    assert mismatched is None


def test_self_pairs_of_attribute_rewriters_are_non_conflicting(rules, shared_solver):
    inc_self = classify_pair(rules["inc1"], rules["inc1"], shared_solver)
    assert inc_self.verdict == "non-conflicting"
    assert Counter(e.classification for e in inc_self.entries) == {
        "ParallelIndependent": 6,
        "DirectlyConfluent": 2,
        "FormulaUnsatisfiable": 1,
    }
    zero_self = classify_pair(rules["setZero"], rules["setZero"], shared_solver)
    assert zero_self.verdict == "non-conflicting"
    assert Counter(e.classification for e in zero_self.entries) == {
        "ParallelIndependent": 7,
        "DirectlyConfluent": 2,
    }


def test_guarded_rule_conflicts_with_itself_but_not_with_copier(rules, shared_solver):
    guarded = classify_pair(rules["guard3"], rules["guard3"], shared_solver)
    assert guarded.verdict == "conflicting"
    assert Counter(e.classification for e in guarded.entries) == {
        "ParallelIndependent": 6,
        "NcpPair": 2,
        "FormulaUnsatisfiable": 1,
    }
    for first, second in (("copyAttr", "guard3"), ("guard3", "copyAttr")):
        report = classify_pair(rules[first], rules[second], shared_solver)
        assert report.verdict == "non-conflicting"
        assert Counter(e.classification for e in report.entries) == {
            "ParallelIndependent": 5,
            "FormulaUnsatisfiable": 3,
            "DirectlyConfluent": 1,
        }


def test_node_deleting_self_pair_conflicts_after_gluing_skips(rules, shared_solver):
    delete = rules["delNode"]
    assert len(enumerate_overlaps(delete, delete)) == 3
    report = classify_pair(delete, delete, shared_solver)
    assert report.verdict == "conflicting"
    assert report.gluing_skipped == 2
    assert [e.classification for e in report.entries] == ["NcpPair"]


def test_reports_use_known_vocabulary_and_clean_stats(rules):
    report = classify_pair(rules["inc1"], rules["setZero"])
    for entry in report.entries:
        assert entry.classification in CLASSIFICATIONS
    assert sorted(report.solver_stats) == [
        "external_queries",
        "queries",
        "sat",
        "unknown",
        "unsat",
    ]
    assert report.solver_stats["queries"] > 0
    assert report.solver_stats["unknown"] == 0
    assert report.solver_stats["external_queries"] == 0


def test_classification_is_deterministic(rules, shared_solver):
    first = classify_pair(rules["inc1"], rules["setZero"], shared_solver)
    second = classify_pair(rules["inc1"], rules["setZero"], shared_solver)
    assert [(e.candidate.merged, e.classification) for e in first.entries] == [
        (e.candidate.merged, e.classification) for e in second.entries
    ]


def test_unknown_confluence_mode_is_rejected(grounded_steps, shared_solver):
    with pytest.raises(ConflictAnalysisError):
        check_direct_confluence(
            grounded_steps["inc1"],
            grounded_steps["inc2"],
            shared_solver,
            mode="sideways",
        )
