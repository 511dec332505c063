"""Symbolic graphs and rule application.

A symbolic graph couples an e-graph with a linear-integer formula over
its label nodes, plus an optional pinning of label nodes to concrete
values. A graph is grounded when every attached label node is pinned;
pinned names double as lazily materialized value constants, so two
grounded graphs are compared as if both carried the same unlimited
constant pool. Rules are spans L <- K -> R sharing one label-node set
and one formula; applying a rule is a double-pushout step on the graph
part.

Two application modes exist. Plain symbolic rewriting requires the host
formula to entail the instantiated rule formula and leaves the host
formula untouched. Narrowing drops that requirement, lets rule label
nodes land on fresh host variables, and conjoins the instantiated rule
formula onto the result; a step whose combined formula is unsatisfiable
does not exist and is reported as a dead branch.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping

from .category import (
    ComplementResult,
    Cospan,
    Span,
    allocate_name,
    cospan,
    pushout,
    pushout_complement,
    pullback,
    span,
)
from .egraph import (
    MATCH_SPEC,
    RULE_SPEC,
    SORTS,
    EGraph,
    EGraphError,
    EGraphMorphism,
    make_morphism,
    subgraph,
)
from .formula import (
    TRUE,
    Atom,
    Formula,
    Lit,
    Or,
    Quantifier,
    Var,
    conjoin,
    evaluate,
    free_vars,
    substitute,
)
from .matching import enumerate_isomorphisms, find_morphisms
from .solver import Solver


class SymbolicGraphError(EGraphError):
    pass


def constant_name(value: int) -> str:
    """Canonical label-node name for a pinned integer value."""
    return f"c{value}" if value >= 0 else f"cn{-value}"


@dataclass(frozen=True)
class SymbolicGraph:
    """E-graph with a formula and optional value pins over its labels."""

    egraph: EGraph
    formula: Formula = TRUE
    constants: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "constants", MappingProxyType(dict(sorted(self.constants.items())))
        )
        labels = set(self.egraph.label_nodes)
        stray = free_vars(self.formula) - labels
        if stray:
            raise SymbolicGraphError(
                f"formula mentions unknown label nodes: {', '.join(sorted(stray))}"
            )
        bad_pins = set(self.constants) - labels
        if bad_pins:
            raise SymbolicGraphError(
                f"constants pin unknown label nodes: {', '.join(sorted(bad_pins))}"
            )

    def full_formula(self) -> Formula:
        """Formula with the constant pins conjoined."""
        pins = [
            Atom("=", Var(name), Lit(value))
            for name, value in self.constants.items()
        ]
        return conjoin([self.formula, *pins])

    def is_grounded(self) -> bool:
        """Every attached label node is pinned to a value."""
        return self.egraph.attached_label_nodes() <= set(self.constants)

    def materialized_labels(self) -> frozenset[str]:
        """Label nodes that carry meaning: attached or used by the formula.

        Everything else is an untouched entry of the implicit variable
        pool and is ignored by isomorphism comparisons.
        """
        return self.egraph.attached_label_nodes() | free_vars(self.formula)

    def core(self) -> "SymbolicGraph":
        """The graph restricted to its materialized label nodes."""
        keep = sorted(self.materialized_labels())
        if len(keep) == len(self.egraph.label_nodes):
            return self
        trimmed = subgraph(self.egraph, {"label": keep})
        pins = {k: v for k, v in self.constants.items() if k in set(keep)}
        return SymbolicGraph(trimmed, self.formula, pins)

    def replace(self, **changes) -> "SymbolicGraph":
        merged = {
            "egraph": self.egraph,
            "formula": self.formula,
            "constants": dict(self.constants),
        }
        merged.update(changes)
        return SymbolicGraph(**merged)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicGraph):
            return NotImplemented
        return (
            self.egraph == other.egraph
            and self.formula == other.formula
            and dict(self.constants) == dict(other.constants)
        )

    def __hash__(self) -> int:
        return hash((self.egraph, self.formula, tuple(self.constants.items())))


# -- rules ---------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """Transformation rule L <- K -> R with one shared formula.

    The embeddings ``l: K -> L`` and ``r: K -> R`` must be injective,
    bijective on label nodes, and keep every label node under its own
    name (the three graphs share one label-node set); the formula ranges
    over that shared label set.
    """

    name: str
    lhs: EGraph
    interface: EGraph
    rhs: EGraph
    l: EGraphMorphism
    r: EGraphMorphism
    formula: Formula = TRUE

    def __post_init__(self):
        for embedding, side, target in (
            (self.l, "left", self.lhs),
            (self.r, "right", self.rhs),
        ):
            if embedding.source != self.interface or embedding.target != target:
                raise SymbolicGraphError(
                    f"rule {self.name}: {side} embedding does not go from the interface"
                )
            problems = embedding.errors()
            if problems:
                raise SymbolicGraphError(f"rule {self.name}: {problems[0]}")
            if not embedding.satisfies(RULE_SPEC):
                raise SymbolicGraphError(
                    f"rule {self.name}: {side} embedding must be injective and "
                    "bijective on label nodes"
                )
            if any(k != v for k, v in embedding.label_map.items()):
                raise SymbolicGraphError(
                    f"rule {self.name}: label nodes must keep their names across the rule"
                )
        if set(self.lhs.label_nodes) != set(self.interface.label_nodes) or set(
            self.rhs.label_nodes
        ) != set(self.interface.label_nodes):
            raise SymbolicGraphError(
                f"rule {self.name}: left, interface and right must share one label-node set"
            )
        stray = free_vars(self.formula) - set(self.interface.label_nodes)
        if stray:
            raise SymbolicGraphError(
                f"rule {self.name}: formula mentions unknown label nodes: "
                f"{', '.join(sorted(stray))}"
            )

    @property
    def label_nodes(self) -> tuple[str, ...]:
        return self.interface.label_nodes

    def symbolic_lhs(self) -> SymbolicGraph:
        return SymbolicGraph(self.lhs, self.formula)

    def symbolic_rhs(self) -> SymbolicGraph:
        return SymbolicGraph(self.rhs, self.formula)

    def reversed(self) -> "Rule":
        return Rule(
            name=f"{self.name}^-1",
            lhs=self.rhs,
            interface=self.interface,
            rhs=self.lhs,
            l=self.r,
            r=self.l,
            formula=self.formula,
        )


def make_rule(
    name: str,
    lhs: EGraph,
    interface: EGraph,
    rhs: EGraph,
    formula: Formula = TRUE,
) -> Rule:
    """Rule whose embeddings are the identity-on-names inclusions."""
    maps = {sort: {eid: eid for eid in interface.ids(sort)} for sort in SORTS}
    return Rule(
        name=name,
        lhs=lhs,
        interface=interface,
        rhs=rhs,
        l=make_morphism(interface, lhs, maps),
        r=make_morphism(interface, rhs, maps),
        formula=formula,
    )


# -- matches ---------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolicMatch:
    """Occurrence of a rule's left side inside a host symbolic graph.

    ``host`` may extend the original host with fresh or pinned label
    nodes (narrowing or constant completion); ``fresh_labels`` names the
    additions.
    """

    rule: Rule
    host: SymbolicGraph
    morphism: EGraphMorphism
    fresh_labels: tuple[str, ...] = ()

    def label_assignment(self) -> dict[str, str]:
        return dict(self.morphism.label_map)

    def instantiated_formula(self) -> Formula:
        """Rule formula rewritten over the host's label nodes."""
        return substitute(self.rule.formula, dict(self.morphism.label_map))


def validate_symbolic_morphism(
    morphism: EGraphMorphism,
    source: SymbolicGraph,
    target: SymbolicGraph,
    solver: Solver,
) -> bool | None:
    """Structure preservation plus formula entailment.

    The target's formula must entail the source formula translated
    along the morphism; returns None when the solver cannot tell.
    """
    if morphism.errors():
        return False
    translated = substitute(source.formula, dict(morphism.label_map))
    return solver.implies(target.full_formula(), translated)


def find_symbolic_matches(
    rule: Rule,
    host: SymbolicGraph,
    solver: Solver,
    *,
    complete_constants: str = "auto",
) -> list[SymbolicMatch]:
    """Entailment-checked matches of the rule's left side into the host.

    Label nodes map onto the host's own label nodes. When the host is
    grounded and ``complete_constants`` is "auto", rule label nodes that
    are unattached in L may additionally be completed to freshly pinned
    constants chosen from a solver model (one representative completion
    per structural match). "never" disables the completion pass.
    """
    if complete_constants not in ("auto", "never"):
        raise ValueError(f"unknown completion mode {complete_constants!r}")
    matches = []
    seen: set[tuple] = set()
    for morphism in find_morphisms(rule.lhs, host.egraph, MATCH_SPEC):
        verdict = solver.implies(
            host.full_formula(), substitute(rule.formula, dict(morphism.label_map))
        )
        if verdict:
            matches.append(SymbolicMatch(rule=rule, host=host, morphism=morphism))
            seen.add(morphism.image_key())

    if complete_constants == "auto" and host.is_grounded():
        matches.extend(_completion_matches(rule, host, solver, seen))
    return matches


def _completion_matches(
    rule: Rule,
    host: SymbolicGraph,
    solver: Solver,
    seen: set[tuple],
) -> list[SymbolicMatch]:
    """Matches that pin unattached rule variables to fresh constants."""
    unattached = sorted(set(rule.lhs.label_nodes) - rule.lhs.attached_label_nodes())
    if not unattached:
        return []
    trimmed = subgraph(
        rule.lhs,
        {"label": [x for x in rule.lhs.label_nodes if x not in unattached]},
    )
    completions = []
    for partial in find_morphisms(trimmed, host.egraph, MATCH_SPEC):
        # fresh variables stand in for the dropped labels while the
        # solver picks representative values for them
        placeholders = {
            name: allocate_name(
                f"{name}?", set(host.egraph.label_nodes) | set(partial.label_map.values())
            )
            for name in unattached
        }
        label_map: dict[str, object] = dict(partial.label_map)
        label_map.update({k: Var(v) for k, v in placeholders.items()})
        query = conjoin([host.full_formula(), substitute(rule.formula, label_map)])
        model = solver.model(query)
        if model is None:
            continue
        values = {name: model.get(placeholders[name], 0) for name in unattached}
        label_ids = set(host.egraph.label_nodes)
        assigned: dict[str, str] = {}
        new_labels = []
        for name in unattached:
            fresh = allocate_name(constant_name(values[name]), label_ids)
            label_ids.add(fresh)
            assigned[name] = fresh
            new_labels.append(fresh)
        extended = SymbolicGraph(
            egraph=host.egraph.replace(
                label_nodes=list(host.egraph.label_nodes) + new_labels
            ),
            formula=host.formula,
            constants={**host.constants, **{assigned[n]: values[n] for n in unattached}},
        )
        full_maps = {sort: dict(partial.map_for(sort)) for sort in SORTS}
        full_maps["label"].update(assigned)
        morphism = make_morphism(rule.lhs, extended.egraph, full_maps)
        key = morphism.image_key()
        if key in seen or morphism.errors():
            continue
        seen.add(key)
        completions.append(
            SymbolicMatch(
                rule=rule,
                host=extended,
                morphism=morphism,
                fresh_labels=tuple(new_labels),
            )
        )
    return completions


def find_narrowing_matches(
    rule: Rule,
    host: SymbolicGraph,
    *,
    max_fresh: int | None = None,
) -> list[SymbolicMatch]:
    """Structural matches that may introduce fresh label variables.

    Each rule label node may map to any host label node or to one
    designated fresh variable of its own; unused fresh variables are
    trimmed from the extended host afterwards. No entailment filtering
    happens here: narrowing refines the host formula instead.
    """
    rule_labels = sorted(rule.lhs.label_nodes)
    budget = len(rule_labels) if max_fresh is None else min(max_fresh, len(rule_labels))
    existing = set(host.egraph.label_nodes)
    fresh_for: dict[str, str] = {}
    taken = set(existing)
    for label in rule_labels[:budget]:
        fresh = allocate_name(f"y{len(fresh_for) + 1}", taken)
        taken.add(fresh)
        fresh_for[label] = fresh
    extended_graph = host.egraph.replace(
        label_nodes=list(host.egraph.label_nodes) + sorted(fresh_for.values())
    )
    restrict = {
        ("label", label): sorted(existing)
        + ([fresh_for[label]] if label in fresh_for else [])
        for label in rule_labels
    }
    matches = []
    for morphism in find_morphisms(rule.lhs, extended_graph, MATCH_SPEC, restrict=restrict):
        used_fresh = sorted(set(morphism.label_map.values()) & set(fresh_for.values()))
        trimmed_graph = host.egraph.replace(
            label_nodes=list(host.egraph.label_nodes) + used_fresh
        )
        narrowed_host = SymbolicGraph(
            egraph=trimmed_graph,
            formula=host.formula,
            constants=host.constants,
        )
        trimmed_morphism = make_morphism(
            rule.lhs,
            trimmed_graph,
            {sort: dict(morphism.map_for(sort)) for sort in SORTS},
        )
        matches.append(
            SymbolicMatch(
                rule=rule,
                host=narrowed_host,
                morphism=trimmed_morphism,
                fresh_labels=tuple(used_fresh),
            )
        )
    return matches


# -- rule application --------------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    """One double-pushout rewrite step together with its construction record.

    ``context`` is the intermediate graph D with its three boundary
    morphisms; ``kind`` records whether the step preserved the input
    formula ("symbolic") or conjoined the instantiated rule formula onto
    it ("narrowing"). ``consistent`` is None when the solver could not
    decide satisfiability of a narrowing result.
    """

    rule: Rule
    input: SymbolicGraph
    output: SymbolicGraph
    match: EGraphMorphism                # L -> input
    comatch: EGraphMorphism              # R -> output
    context: SymbolicGraph               # D
    interface_embedding: EGraphMorphism  # K -> D
    context_to_input: EGraphMorphism     # D -> input
    context_to_output: EGraphMorphism    # D -> output
    kind: str
    fresh_labels: tuple[str, ...] = ()
    consistent: bool | None = True


@dataclass(frozen=True)
class Inconsistent:
    """A narrowing branch whose combined formula is unsatisfiable.

    The rewrite exists structurally but denotes no instances, so the
    derivation does not exist; the record keeps the match and the
    offending formula for reporting.
    """

    rule: Rule
    input: SymbolicGraph
    match: EGraphMorphism
    formula: Formula
    fresh_labels: tuple[str, ...] = ()


def _dpo(match: SymbolicMatch) -> tuple[ComplementResult, Cospan]:
    complement = pushout_complement(match.rule.l, match.morphism)
    glued = pushout(span(match.rule.r, complement.interface_embedding))
    return complement, glued


def _derivation(
    match: SymbolicMatch,
    output_formula: Formula,
    kind: str,
    consistent: bool | None,
) -> Derivation:
    complement, glued = _dpo(match)
    host = match.host
    context_labels = set(complement.context.label_nodes)
    context = SymbolicGraph(
        egraph=complement.context,
        formula=host.formula,
        constants={k: v for k, v in host.constants.items() if k in context_labels},
    )
    output_labels = set(glued.target.label_nodes)
    output = SymbolicGraph(
        egraph=glued.target,
        formula=output_formula,
        constants={k: v for k, v in host.constants.items() if k in output_labels},
    )
    return Derivation(
        rule=match.rule,
        input=host,
        output=output,
        match=match.morphism,
        comatch=glued.left,
        context=context,
        interface_embedding=complement.interface_embedding,
        context_to_input=complement.context_embedding,
        context_to_output=glued.right,
        kind=kind,
        fresh_labels=match.fresh_labels,
        consistent=consistent,
    )


def apply_symbolic(match: SymbolicMatch) -> Derivation:
    """Rewrite under an entailment-valid match; the formula is carried over.

    The caller vouches for validity (find_symbolic_matches checks it).
    Raises GluingViolation when the deletion is blocked.
    """
    return _derivation(match, match.host.formula, "symbolic", True)


def apply_narrowing(match: SymbolicMatch, solver: Solver) -> Derivation | Inconsistent:
    """Rewrite and conjoin the instantiated rule formula onto the host's.

    Returns an :class:`Inconsistent` record when the combined formula
    (with the host's constant pins) is unsatisfiable — the derivation
    does not exist. A solver that cannot decide yields a derivation
    with ``consistent=None``.
    """
    combined = conjoin([match.host.formula, match.instantiated_formula()])
    step = _derivation(match, combined, "narrowing", True)
    verdict = solver.satisfiable(step.output.full_formula())
    if verdict is False:
        return Inconsistent(
            rule=match.rule,
            input=match.host,
            match=match.morphism,
            formula=step.output.full_formula(),
            fresh_labels=match.fresh_labels,
        )
    if verdict is None:
        return dataclasses.replace(step, consistent=None)
    return step


def _widen_derivation(
    derivation: Derivation, pool: Mapping[str, int | None]
) -> Derivation:
    """Materialize the given pool labels throughout one derivation."""
    extra = {
        name: value
        for name, value in pool.items()
        if not derivation.input.egraph.has_element("label", name)
    }
    if not extra:
        return derivation
    names = sorted(extra)
    pins = {name: value for name, value in extra.items() if value is not None}

    def widen(sg: SymbolicGraph) -> SymbolicGraph:
        return SymbolicGraph(
            egraph=sg.egraph.replace(
                label_nodes=list(sg.egraph.label_nodes) + names
            ),
            formula=sg.formula,
            constants={**sg.constants, **pins},
        )

    def rebuild(morphism: EGraphMorphism, source, target, extend: bool) -> EGraphMorphism:
        maps = {sort: dict(morphism.map_for(sort)) for sort in SORTS}
        if extend:
            maps["label"].update({name: name for name in names})
        return make_morphism(source, target, maps)

    rule = derivation.rule
    input_ = widen(derivation.input)
    output = widen(derivation.output)
    context = widen(derivation.context)
    return Derivation(
        rule=rule,
        input=input_,
        output=output,
        match=rebuild(derivation.match, rule.lhs, input_.egraph, False),
        comatch=rebuild(derivation.comatch, rule.rhs, output.egraph, False),
        context=context,
        interface_embedding=rebuild(
            derivation.interface_embedding, rule.interface, context.egraph, False
        ),
        context_to_input=rebuild(
            derivation.context_to_input, context.egraph, input_.egraph, True
        ),
        context_to_output=rebuild(
            derivation.context_to_output, context.egraph, output.egraph, True
        ),
        kind=derivation.kind,
        fresh_labels=derivation.fresh_labels,
        consistent=derivation.consistent,
    )


def align_derivations(d1: Derivation, d2: Derivation) -> tuple[Derivation, Derivation]:
    """Widen two derivations over one host onto a shared pool slice.

    Matching can materialize label nodes from the implicit pool (fresh
    narrowing variables, completed constants), so two derivations over
    the same host may disagree on which pool labels their graphs carry.
    This widens each by the other's labels so the inputs coincide
    exactly. Same-named labels are taken to be the same pool entry.
    Raises when the inputs differ beyond pool labels (different
    structure, formulas, or pinned values): those are genuinely
    different hosts.
    """
    if d1.input == d2.input:
        return d1, d2
    pool1 = {
        name: d1.input.constants.get(name) for name in d1.input.egraph.label_nodes
    }
    pool2 = {
        name: d2.input.constants.get(name) for name in d2.input.egraph.label_nodes
    }
    one = _widen_derivation(d1, pool2)
    two = _widen_derivation(d2, pool1)
    if one.input != two.input:
        raise SymbolicGraphError(
            "derivations do not share a host (inputs differ beyond pool labels)"
        )
    return one, two


# -- grounding ---------------------------------------------------------------------


def ground(sg: SymbolicGraph, sigma: Mapping[str, int]) -> SymbolicGraph:
    """Concrete instance of ``sg`` under a satisfying assignment.

    Every attached label node is replaced by the canonical constant for
    its assigned value (labels sharing a value merge into one constant);
    unattached label nodes are dropped. The result carries no formula
    beyond its pins. Rejects assignments that miss needed variables or
    falsify the formula.
    """
    attached = sg.egraph.attached_label_nodes()
    needed = attached | free_vars(sg.full_formula())
    missing = sorted(needed - set(sigma))
    if missing:
        raise SymbolicGraphError(
            f"assignment misses label nodes: {', '.join(missing)}"
        )
    if not evaluate(sg.full_formula(), sigma):
        raise SymbolicGraphError("assignment does not satisfy the formula")

    renamed = {name: constant_name(sigma[name]) for name in attached}
    node_labels = {
        eid: (carrier, renamed[label], tag)
        for eid, (carrier, label, tag) in sg.egraph.node_labels.items()
    }
    edge_labels = {
        eid: (carrier, renamed[label], tag)
        for eid, (carrier, label, tag) in sg.egraph.edge_labels.items()
    }
    egraph = EGraph(
        nodes=sg.egraph.nodes,
        edges=dict(sg.egraph.edges),
        label_nodes=sorted(set(renamed.values())),
        node_labels=node_labels,
        edge_labels=edge_labels,
    )
    pins = {renamed[name]: sigma[name] for name in attached}
    return SymbolicGraph(egraph=egraph, formula=TRUE, constants=pins)


def ground_from_model(sg: SymbolicGraph, solver: Solver) -> SymbolicGraph | None:
    """Ground under one solver model of the graph's formula, if any."""
    model = solver.model(sg.full_formula())
    if model is None:
        return None
    needed = sg.egraph.attached_label_nodes() | free_vars(sg.full_formula())
    sigma = {name: int(model.get(name, 0)) for name in needed}
    return ground(sg, sigma)


# -- isomorphism -------------------------------------------------------------------


@dataclass(frozen=True)
class IsoSearch:
    """Outcome of a symbolic isomorphism search.

    ``witness`` maps the first graph's core onto the second's;
    ``indeterminate`` is set when at least one candidate was dropped
    only because the solver answered unknown.
    """

    witness: EGraphMorphism | None
    indeterminate: bool = False

    def __bool__(self) -> bool:
        return self.witness is not None


def _label_restriction(first: SymbolicGraph, second: SymbolicGraph) -> dict:
    """Pinned labels may only pair with equal-valued pins."""
    by_value: dict[int, list[str]] = {}
    for name, value in second.constants.items():
        by_value.setdefault(value, []).append(name)
    unpinned = [x for x in second.egraph.label_nodes if x not in second.constants]
    restrict = {}
    for name in first.egraph.label_nodes:
        if name in first.constants:
            restrict[("label", name)] = sorted(by_value.get(first.constants[name], []))
        else:
            restrict[("label", name)] = sorted(unpinned)
    return restrict


def iter_symbolic_isos(
    first: SymbolicGraph,
    second: SymbolicGraph,
    solver: Solver,
) -> Iterator[EGraphMorphism]:
    """Graph isomorphisms under which the two formulas are equivalent.

    Both graphs are compared on their cores: label nodes that are
    neither attached nor used by a formula belong to the implicit
    variable pool and are skipped. Pinned label nodes only pair with
    labels pinned to the same value. Candidates the solver cannot
    decide are not yielded.
    """
    for iso, _ in iso_candidates(first, second, solver):
        yield iso


def iso_candidates(
    first: SymbolicGraph,
    second: SymbolicGraph,
    solver: Solver,
) -> Iterator[tuple[EGraphMorphism, bool]]:
    """Core isomorphism candidates, flagged when the solver was unsure.

    Yields ``(iso, False)`` when the formulas are provably equivalent
    under the label renaming and ``(iso, True)`` when the solver could
    not decide; structurally valid but provably inequivalent candidates
    are dropped.
    """
    one, two = first.core(), second.core()
    restrict = _label_restriction(one, two)
    for iso in enumerate_isomorphisms(one.egraph, two.egraph, restrict=restrict):
        translated = substitute(one.full_formula(), dict(iso.label_map))
        verdict = solver.equivalent(two.full_formula(), translated)
        if verdict:
            yield iso, False
        elif verdict is None:
            yield iso, True


def search_symbolic_iso(
    first: SymbolicGraph,
    second: SymbolicGraph,
    solver: Solver,
) -> IsoSearch:
    """First formula-respecting core isomorphism, tracking solver gaps."""
    saw_unknown = False
    for iso, unknown in iso_candidates(first, second, solver):
        if unknown:
            saw_unknown = True
            continue
        return IsoSearch(witness=iso)
    return IsoSearch(witness=None, indeterminate=saw_unknown)


def symbolic_iso(
    first: SymbolicGraph,
    second: SymbolicGraph,
    solver: Solver,
) -> EGraphMorphism | None:
    """First formula-respecting isomorphism between the cores, or None."""
    return search_symbolic_iso(first, second, solver).witness


def grounded_value(sg: SymbolicGraph, label: str) -> int:
    if label not in sg.constants:
        raise SymbolicGraphError(f"label node {label!r} is not pinned")
    return sg.constants[label]


def grounded_equal(first: SymbolicGraph, second: SymbolicGraph) -> bool:
    """Isomorphic as grounded graphs (pinned values must agree on the nose)."""
    if not (first.is_grounded() and second.is_grounded()):
        raise SymbolicGraphError("grounded comparison needs grounded graphs")
    one, two = first.core(), second.core()
    restrict = _label_restriction(one, two)
    return bool(enumerate_isomorphisms(one.egraph, two.egraph, restrict=restrict))


# -- pushouts and pullbacks of symbolic graphs ----------------------------------------


@dataclass(frozen=True)
class SymbolicMorphism:
    """E-graph morphism together with its symbolic endpoints."""

    source: SymbolicGraph
    target: SymbolicGraph
    morphism: EGraphMorphism

    def __post_init__(self):
        if (
            self.morphism.source != self.source.egraph
            or self.morphism.target != self.target.egraph
        ):
            raise SymbolicGraphError("morphism endpoints do not match the symbolic graphs")

    def validate(self, solver: Solver) -> bool | None:
        return validate_symbolic_morphism(self.morphism, self.source, self.target, solver)


@dataclass(frozen=True)
class SymbolicSpan:
    """Two symbolic morphisms out of a shared apex."""

    apex: SymbolicGraph
    left: SymbolicMorphism
    right: SymbolicMorphism

    def __post_init__(self):
        if self.left.source != self.apex or self.right.source != self.apex:
            raise SymbolicGraphError("span legs must start at the apex")


@dataclass(frozen=True)
class SymbolicCospan:
    """Two symbolic morphisms into a shared target."""

    target: SymbolicGraph
    left: SymbolicMorphism
    right: SymbolicMorphism

    def __post_init__(self):
        if self.left.target != self.target or self.right.target != self.target:
            raise SymbolicGraphError("cospan legs must end at the target")


def _merge_pins(
    assignments: list[tuple[Mapping[str, int], Mapping[str, str]]]
) -> dict[str, int]:
    """Carry constant pins through renamings, refusing contradictions."""
    merged: dict[str, int] = {}
    for constants, label_map in assignments:
        for name, value in constants.items():
            target = label_map[name]
            if merged.setdefault(target, value) != value:
                raise SymbolicGraphError(
                    f"pinned label {target!r} would carry two values"
                )
    return merged


def symbolic_pushout(sp: SymbolicSpan) -> SymbolicCospan:
    """Pushout on the graph parts; the result formula is the conjunction
    of both leg-target formulas translated into the glued graph."""
    po = pushout(span(sp.left.morphism, sp.right.morphism))
    b_sg, c_sg = sp.left.target, sp.right.target
    phi = conjoin(
        [
            substitute(b_sg.formula, dict(po.left.label_map)),
            substitute(c_sg.formula, dict(po.right.label_map)),
        ]
    )
    pins = _merge_pins(
        [(b_sg.constants, po.left.label_map), (c_sg.constants, po.right.label_map)]
    )
    target = SymbolicGraph(po.target, phi, pins)
    return SymbolicCospan(
        target=target,
        left=SymbolicMorphism(b_sg, target, po.left),
        right=SymbolicMorphism(c_sg, target, po.right),
    )


def _preimage_formula(phi: Formula, projection: EGraphMorphism) -> Formula:
    """Rewrite a formula over a projection's target into apex variables.

    Variables with several preimages take the alphabetically first one;
    variables with none are existentially quantified.
    """
    inverse: dict[str, str] = {}
    for apex_label in sorted(projection.source.label_nodes):
        inverse.setdefault(projection.label_map[apex_label], apex_label)
    mapping: dict[str, Var] = {k: Var(v) for k, v in inverse.items()}
    unmapped = sorted(free_vars(phi) - set(inverse))
    if not unmapped:
        return substitute(phi, mapping)
    taken = set(projection.source.label_nodes) | set(projection.target.label_nodes)
    bound = []
    for name in unmapped:
        fresh = allocate_name(name, taken)
        taken.add(fresh)
        bound.append(fresh)
        mapping[name] = Var(fresh)
    return Quantifier("exists", tuple(bound), substitute(phi, mapping))


def symbolic_pullback(
    cs: SymbolicCospan, *, formula_mode: str = "disjunction"
) -> SymbolicSpan:
    """Pullback on the graph parts with a choice of apex formula.

    "disjunction" (default) joins the two leg-source formulas with `or`
    after translating them into apex variables — the reading under which
    both projections stay valid symbolic morphisms. "conjunction" is the
    alternative reading, kept behind this switch so both can be probed.
    """
    if formula_mode not in ("disjunction", "conjunction"):
        raise ValueError(f"unknown formula mode {formula_mode!r}")
    pb = pullback(cospan(cs.left.morphism, cs.right.morphism))
    b_sg, c_sg = cs.left.source, cs.right.source
    left_phi = _preimage_formula(b_sg.formula, pb.left)
    right_phi = _preimage_formula(c_sg.formula, pb.right)
    if formula_mode == "conjunction":
        phi = conjoin([left_phi, right_phi])
    elif TRUE in (left_phi, right_phi):
        phi = TRUE
    else:
        phi = Or((left_phi, right_phi))

    pins: dict[str, int] = {}
    for apex_label in pb.apex.label_nodes:
        values = []
        for leg, sg in ((pb.left, b_sg), (pb.right, c_sg)):
            pinned = sg.constants.get(leg.label_map[apex_label])
            if pinned is not None:
                values.append(pinned)
        if values and values.count(values[0]) != len(values):
            raise SymbolicGraphError(
                f"pinned label {apex_label!r} would carry two values"
            )
        if values:
            pins[apex_label] = values[0]

    apex = SymbolicGraph(pb.apex, phi, pins)
    return SymbolicSpan(
        apex=apex,
        left=SymbolicMorphism(apex, b_sg, pb.left),
        right=SymbolicMorphism(apex, c_sg, pb.right),
    )
