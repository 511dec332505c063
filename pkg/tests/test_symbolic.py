"""Symbolic graphs, rules, and derivations (entailment and narrowing modes)."""

import pytest
from pool import attr_rule, del_node_rule, grounded_host, paper_rules

from sygra.category import GluingViolation
from sygra.egraph import EGraph, compose
from sygra.formula import TRUE, conjoin, free_vars, parse_formula
from sygra.symbolic import (
    Inconsistent,
    SymbolicGraph,
    SymbolicGraphError,
    SymbolicMatch,
    align_derivations,
    apply_narrowing,
    apply_symbolic,
    constant_name,
    find_narrowing_matches,
    find_symbolic_matches,
    make_rule,
)

# ---------------------------------------------------------------------------
# Symbolic graphs


def test_constant_name():
    assert constant_name(42) == "c42"
    assert constant_name(0) == "c0"
    assert constant_name(-3) == "cn3"


def test_formula_variables_must_be_label_nodes():
    good = SymbolicGraph(
        egraph=EGraph(label_nodes=["x"]), formula=parse_formula("x = 1")
    )
    assert free_vars(good.formula) == frozenset({"x"})
    with pytest.raises(SymbolicGraphError):
        SymbolicGraph(egraph=EGraph(), formula=parse_formula("x = 1"))
    with pytest.raises(SymbolicGraphError):
        SymbolicGraph(egraph=EGraph(label_nodes=["x"]), constants={"y": 1})


def test_grounded_means_attached_labels_pinned():
    host = grounded_host(5)
    assert host.is_grounded()
    unpinned = host.replace(constants={})
    assert not unpinned.is_grounded()
    # unattached labels do not affect groundedness
    widened = host.replace(egraph=host.egraph.replace(label_nodes=("c5", "spare")))
    assert widened.is_grounded()


def test_core_trims_unmaterialized_labels():
    host = grounded_host(5)
    widened = host.replace(
        egraph=host.egraph.replace(label_nodes=("c5", "spare")),
        constants={"c5": 5, "spare": 9},
    )
    assert widened.core() == host.replace(constants={"c5": 5})
    core = widened.core()
    assert "spare" not in core.egraph.label_nodes
    assert "spare" not in core.constants
    # formula variables keep their labels materialized
    constrained = widened.replace(formula=parse_formula("spare = 9"))
    assert "spare" in constrained.core().egraph.label_nodes


def test_full_formula_conjoins_pins():
    host = grounded_host(5)
    assert host.full_formula() == parse_formula("c5 = 5")
    loose = SymbolicGraph(
        egraph=EGraph(label_nodes=["x"]), formula=parse_formula("x <= 3")
    )
    assert loose.full_formula() == parse_formula("x <= 3")


# ---------------------------------------------------------------------------
# Rule construction


def test_make_rule_shares_label_set_and_checks_formula():
    inc1, _, _ = paper_rules()
    assert inc1.label_nodes == ("x", "x2")
    assert inc1.l.errors() == [] and inc1.r.errors() == []
    with pytest.raises(SymbolicGraphError):
        attr_rule("bad", "n", "x", "x2", "q = 1")  # q is not a label node
    with pytest.raises(SymbolicGraphError):
        make_rule(
            "bad",
            EGraph(nodes=["n"], label_nodes=["x"]),
            EGraph(nodes=["n"]),
            EGraph(nodes=["n"]),
        )  # label sets differ across the rule


def test_rule_reversal_swaps_sides():
    inc1, _, _ = paper_rules()
    rev = inc1.reversed()
    assert rev.lhs == inc1.rhs and rev.rhs == inc1.lhs
    assert rev.formula == inc1.formula


# ---------------------------------------------------------------------------
# Entailment-mode application on the grounded running example


def test_increment_on_grounded_host_yields_value_43(shared_solver):
    inc1, _, _ = paper_rules()
    host = grounded_host(42)
    matches = find_symbolic_matches(inc1, host, shared_solver)
    assert len(matches) == 1
    step = apply_symbolic(matches[0])
    assert dict(step.output.constants) == {"c42": 42, "c43": 43}
    (attr,) = step.output.egraph.node_labels.values()
    assert attr == ("u", "c43", "val")
    assert step.kind == "symbolic"
    assert step.consistent is True


def test_label_set_and_formula_survive_derivation(shared_solver):
    inc1, inc2, set_zero = paper_rules()
    host = grounded_host(42)
    for rule in (inc1, inc2, set_zero):
        for match in find_symbolic_matches(rule, host, shared_solver):
            step = apply_symbolic(match)
            assert step.input.egraph.label_nodes == step.output.egraph.label_nodes
            assert step.input.formula == step.output.formula
            assert dict(step.input.constants) == dict(step.output.constants)


def test_empty_lhs_rule_matches_once_anywhere(shared_solver):
    empty = make_rule("emptyLhs", EGraph(), EGraph(), EGraph(nodes=["fresh"]))
    host = grounded_host(7)
    matches = find_symbolic_matches(empty, host, shared_solver)
    assert len(matches) == 1
    assert matches[0].morphism.image() == frozenset()
    step = apply_symbolic(matches[0])
    assert len(step.output.egraph.nodes) == len(host.egraph.nodes) + 1


def test_derivation_squares_commute(shared_solver):
    inc1, _, _ = paper_rules()
    step = apply_symbolic(find_symbolic_matches(inc1, grounded_host(42), shared_solver)[0])
    left = compose(step.context_to_input, step.interface_embedding)
    assert left.same_maps(compose(step.match, step.rule.l))
    right = compose(step.context_to_output, step.interface_embedding)
    assert right.same_maps(compose(step.comatch, step.rule.r))
    assert step.comatch.errors() == []
    assert step.context_to_output.errors() == []


# ---------------------------------------------------------------------------
# Narrowing mode


def test_narrowing_succeeds_where_entailment_fails(solver):
    inc1, _, _ = paper_rules()
    host = SymbolicGraph(
        egraph=EGraph(
            nodes=["u"], label_nodes=["v0"], node_labels={"h": ("u", "v0", "val")}
        ),
        formula=parse_formula("v0 <= 9"),
    )
    assert find_symbolic_matches(inc1, host, solver) == []
    matches = find_narrowing_matches(inc1, host)
    assert matches
    fresh = [m for m in matches if m.fresh_labels]
    assert fresh
    step = apply_narrowing(fresh[0], solver)
    assert step.kind == "narrowing"
    assert step.consistent is True
    # the instantiated rule formula was conjoined onto the host's
    assert step.output.formula == conjoin(
        [host.formula, matches[0].instantiated_formula()]
    ) or set(free_vars(step.output.formula)) >= {"v0"}


def test_narrowing_detects_unsatisfiable_combination(solver):
    guard3 = attr_rule("guard3", "g", "a", "a2", "a <= 2 && a2 = a + 3")
    host = grounded_host(5)
    results = [
        apply_narrowing(match, solver)
        for match in find_narrowing_matches(guard3, host)
    ]
    assert results
    assert all(isinstance(r, Inconsistent) for r in results)
    assert all(r.formula is not None for r in results)


def test_narrowing_on_satisfiable_guard(solver):
    guard3 = attr_rule("guard3", "g", "a", "a2", "a <= 2 && a2 = a + 3")
    host = grounded_host(1)
    steps = [
        step
        for step in (
            apply_narrowing(m, solver) for m in find_narrowing_matches(guard3, host)
        )
        if not isinstance(step, Inconsistent)
    ]
    assert steps
    assert any(step.fresh_labels for step in steps)


def test_max_fresh_budget_limits_materialization():
    inc1, _, _ = paper_rules()
    host = grounded_host(3)
    unlimited = find_narrowing_matches(inc1, host)
    budget_zero = find_narrowing_matches(inc1, host, max_fresh=0)
    assert all(not m.fresh_labels for m in budget_zero)
    assert len(budget_zero) < len(unlimited)


def test_labels_are_never_deleted(solver):
    rules = [*paper_rules(), del_node_rule()]
    host = grounded_host(2)
    for rule in rules:
        for match in find_narrowing_matches(rule, host):
            step = apply_narrowing(match, solver)
            if isinstance(step, Inconsistent):
                continue
            assert set(step.output.egraph.label_nodes) >= set(
                host.egraph.label_nodes
            )


# ---------------------------------------------------------------------------
# Gluing violations


def test_deleting_node_with_extra_edge_is_blocked(shared_solver):
    deleter = del_node_rule()
    host = SymbolicGraph(
        egraph=EGraph(
            nodes=["q1", "q2"],
            edges={"e": ("q1", "q2")},
            label_nodes=["c7"],
            node_labels={"h": ("q1", "c7", "val")},
        ),
        constants={"c7": 7},
    )
    matches = find_symbolic_matches(deleter, host, shared_solver)
    assert matches
    with pytest.raises(GluingViolation) as err:
        apply_symbolic(matches[0])
    assert err.value.dangling


def test_deleting_isolated_node_succeeds(shared_solver):
    deleter = del_node_rule()
    host = grounded_host(7)
    matches = find_symbolic_matches(deleter, host, shared_solver)
    assert matches
    step = apply_symbolic(matches[0])
    assert step.output.egraph.nodes == ()
    # the label node survives the deletion
    assert "c7" in step.output.egraph.label_nodes


# ---------------------------------------------------------------------------
# Aligning derivations over one host


def test_align_widens_to_a_shared_pool_slice(shared_solver):
    inc1, inc2, _ = paper_rules()
    host = grounded_host(42)
    d1 = apply_symbolic(find_symbolic_matches(inc1, host, shared_solver)[0])
    d2 = apply_symbolic(find_symbolic_matches(inc2, host, shared_solver)[0])
    # completion materialized different constants on each side
    assert dict(d1.input.constants) != dict(d2.input.constants)
    a1, a2 = align_derivations(d1, d2)
    assert a1.input == a2.input
    assert set(a1.input.egraph.label_nodes) == {"c42", "c43", "c44"}
    assert dict(a1.input.constants) == {"c42": 42, "c43": 43, "c44": 44}
    # alignment preserves each side's own rewrite
    assert dict(a1.output.constants)["c43"] == 43
    assert dict(a2.output.constants)["c44"] == 44


def test_align_rejects_structurally_different_hosts(shared_solver):
    inc1, _, _ = paper_rules()
    d1 = apply_symbolic(find_symbolic_matches(inc1, grounded_host(1), shared_solver)[0])
    d2 = apply_symbolic(find_symbolic_matches(inc1, grounded_host(2), shared_solver)[0])
    with pytest.raises(SymbolicGraphError):
        align_derivations(d1, d2)
