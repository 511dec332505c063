"""Static conflict analysis for pairs of symbolic rewrite rules.

The analyzer enumerates the finitely many ways the two left-hand sides
can share structure, applies both rules on each shared (minimal)
context, and sorts the outcomes into four classes:

* ``FormulaUnsatisfiable`` — the combined applicability formula has no
  model, so the overlap denotes no instances;
* ``ParallelIndependent`` — both matches survive the other step's
  deletions, so the steps commute trivially;
* ``DirectlyConfluent`` — the steps interfere, but each result can be
  rewritten by the opposite rule, within a single step, to a common
  graph, with every untouched element tracked through both roundabouts;
* ``NcpPair`` — the remaining interferences, reported as conflicts.

A rule pair is conflicting exactly when at least one overlap is an
``NcpPair``. The companion :func:`embeds` check relates a minimal pair
back to a pair of derivations over an arbitrary host, which is how the
analysis is validated against brute-force ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from .category import GluingViolation, Span, allocate_name, cospan, pullback
from .egraph import (
    MATCH_SPEC,
    SORTS,
    EGraph,
    EGraphMorphism,
    Element,
    compose,
    make_morphism,
)
from .formula import (
    TRUE,
    And,
    Atom,
    Formula,
    Quantifier,
    Term,
    Var,
    conjoin,
    free_vars,
    substitute,
    term_vars,
)
from .solver import Solver
from .symbolic import (
    Derivation,
    Inconsistent,
    Rule,
    SymbolicGraph,
    SymbolicMatch,
    align_derivations,
    apply_narrowing,
    apply_symbolic,
    find_narrowing_matches,
    find_symbolic_matches,
    iso_candidates,
    validate_symbolic_morphism,
)

FORMULA_UNSATISFIABLE = "FormulaUnsatisfiable"
PARALLEL_INDEPENDENT = "ParallelIndependent"
DIRECTLY_CONFLUENT = "DirectlyConfluent"
NCP_PAIR = "NcpPair"
CLASSIFICATIONS = (
    FORMULA_UNSATISFIABLE,
    PARALLEL_INDEPENDENT,
    DIRECTLY_CONFLUENT,
    NCP_PAIR,
)

CONFLICTING = "conflicting"
NON_CONFLICTING = "non-conflicting"

# Decision order for overlap pairs: carriers before the things attached
# to them, so admissibility of an edge or attribute pair only looks at
# decisions already made.
_SORT_ORDER = ("node", "label", "edge", "node_label", "edge_label")


class ConflictAnalysisError(ValueError):
    """Misused analysis operation (mismatched inputs, unknown mode)."""


# -- overlap enumeration -------------------------------------------------------------


@dataclass(frozen=True)
class OverlapCandidate:
    """A jointly-surjective overlap of two left-hand sides.

    ``merged`` records which first-rule/second-rule elements were
    identified, as (sort, first id, second id) triples in canonical
    order; it determines the candidate uniquely. Every element of
    ``sk`` is the image of a first-rule element under ``o1`` or a
    second-rule element under ``o2``, and ``sk``'s formula is the
    conjunction of both rule formulas translated along those maps.
    """

    sk: SymbolicGraph
    o1: EGraphMorphism
    o2: EGraphMorphism
    merged: tuple[tuple[str, str, str], ...]


def _tags_mergeable(first: str | None, second: str | None) -> bool:
    return first is None or second is None or first == second


def _candidate_pairs(l1: EGraph, l2: EGraph) -> list[tuple[str, str, str]]:
    pairs: list[tuple[str, str, str]] = []
    for sort in _SORT_ORDER:
        for a in l1.ids(sort):
            for b in l2.ids(sort):
                if sort in ("node_label", "edge_label") and not _tags_mergeable(
                    l1.label_tag(sort, a), l2.label_tag(sort, b)
                ):
                    continue
                pairs.append((sort, a, b))
    return pairs


def _pair_admissible(
    sort: str,
    a: str,
    b: str,
    l1: EGraph,
    l2: EGraph,
    chosen: Mapping[str, Mapping[str, str]],
) -> bool:
    """Merging an edge or attribute requires its endpoints to be merged."""
    if sort == "edge":
        (s1, t1), (s2, t2) = l1.edges[a], l2.edges[b]
        return chosen["node"].get(s1) == s2 and chosen["node"].get(t1) == t2
    if sort == "node_label":
        (c1, x1, _), (c2, x2, _) = l1.node_labels[a], l2.node_labels[b]
        return chosen["node"].get(c1) == c2 and chosen["label"].get(x1) == x2
    if sort == "edge_label":
        (c1, x1, _), (c2, x2, _) = l1.edge_labels[a], l2.edge_labels[b]
        return chosen["edge"].get(c1) == c2 and chosen["label"].get(x1) == x2
    return True


def _correspondences(l1: EGraph, l2: EGraph) -> Iterator[tuple[tuple[str, str, str], ...]]:
    """All partial injective cross-graph identifications that share structure.

    Yields only correspondences containing at least one node or edge
    pair: rules that share nothing but label variables do not interact
    through the graph and their disjoint placements are not overlaps.
    """
    pairs = _candidate_pairs(l1, l2)
    chosen: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    taken: dict[str, set[str]] = {sort: set() for sort in SORTS}
    out: list[tuple[tuple[str, str, str], ...]] = []

    def walk(index: int) -> None:
        if index == len(pairs):
            if chosen["node"] or chosen["edge"]:
                out.append(
                    tuple(p for p in pairs if chosen[p[0]].get(p[1]) == p[2])
                )
            return
        sort, a, b = pairs[index]
        if (
            a not in chosen[sort]
            and b not in taken[sort]
            and _pair_admissible(sort, a, b, l1, l2, chosen)
        ):
            chosen[sort][a] = b
            taken[sort].add(b)
            walk(index + 1)
            del chosen[sort][a]
            taken[sort].discard(b)
        walk(index + 1)

    walk(0)
    return iter(out)


def _quotient(r1: Rule, r2: Rule, merged: tuple[tuple[str, str, str], ...]) -> OverlapCandidate:
    """Glue the two left-hand sides along ``merged``.

    First-rule elements keep their names; unmerged second-rule elements
    keep theirs unless taken, in which case they get a ``~k`` variant.
    """
    l1, l2 = r1.lhs, r2.lhs
    partner: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    absorbed: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for sort, a, b in merged:
        partner[sort][b] = a
        absorbed[sort][a] = b

    names: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for sort in SORTS:
        used = set(l1.ids(sort))
        for b in l2.ids(sort):
            if b in partner[sort]:
                names[sort][b] = partner[sort][b]
            else:
                fresh = allocate_name(b, used)
                used.add(fresh)
                names[sort][b] = fresh

    def merged_tag(own: str | None, sort: str, a: str) -> str | None:
        if own is not None or a not in absorbed[sort]:
            return own
        return l2.label_tag(sort, absorbed[sort][a])

    edges = dict(l1.edges)
    node_labels = {
        lid: (carrier, label, merged_tag(tag, "node_label", lid))
        for lid, (carrier, label, tag) in l1.node_labels.items()
    }
    edge_labels = {
        lid: (carrier, label, merged_tag(tag, "edge_label", lid))
        for lid, (carrier, label, tag) in l1.edge_labels.items()
    }
    for eid, (src, tgt) in l2.edges.items():
        if eid not in partner["edge"]:
            edges[names["edge"][eid]] = (names["node"][src], names["node"][tgt])
    for lid, (carrier, label, tag) in l2.node_labels.items():
        if lid not in partner["node_label"]:
            node_labels[names["node_label"][lid]] = (
                names["node"][carrier],
                names["label"][label],
                tag,
            )
    for lid, (carrier, label, tag) in l2.edge_labels.items():
        if lid not in partner["edge_label"]:
            edge_labels[names["edge_label"][lid]] = (
                names["edge"][carrier],
                names["label"][label],
                tag,
            )

    graph = EGraph(
        nodes=set(l1.nodes) | {names["node"][n] for n in l2.nodes},
        edges=edges,
        label_nodes=set(l1.label_nodes) | {names["label"][x] for x in l2.label_nodes},
        node_labels=node_labels,
        edge_labels=edge_labels,
    )
    o1 = make_morphism(
        l1, graph, {sort: {a: a for a in l1.ids(sort)} for sort in SORTS}
    )
    o2 = make_morphism(l2, graph, {sort: dict(names[sort]) for sort in SORTS})
    bad = o1.errors() or o2.errors()
    if bad:  # pragma: no cover - construction is closed by admissibility
        raise ConflictAnalysisError(f"overlap gluing produced an invalid match: {bad[0]}")
    phi = conjoin((r1.formula, substitute(r2.formula, dict(names["label"]))))
    return OverlapCandidate(
        sk=SymbolicGraph(egraph=graph, formula=phi), o1=o1, o2=o2, merged=merged
    )


def enumerate_overlaps(r1: Rule, r2: Rule) -> list[OverlapCandidate]:
    """All overlaps of the two left-hand sides that share graph structure.

    Candidates range over every partial injective correspondence
    between the two left-hand sides that identifies at least one node
    or edge, closed under endpoints: merged edges and attributes
    require merged carriers and merged label nodes, and attribute tags
    must be reconcilable. Elements of one and the same rule are never
    identified with each other, so both projections are injective;
    label nodes may be identified across the rules. Satisfiability of
    the combined formula is deliberately not checked here — callers tag
    unsatisfiable candidates rather than hiding them.

    The result is deterministically ordered by the identification sets.
    """
    out = [_quotient(r1, r2, merged) for merged in _correspondences(r1.lhs, r2.lhs)]
    out.sort(key=lambda cand: cand.merged)
    return out


# -- parallel dependence -------------------------------------------------------------


@dataclass(frozen=True)
class DependenceResult:
    """Verdict of the parallel-dependence check, with blocking evidence.

    ``first_blocked`` lists input elements used by the first match but
    deleted by the second step — each one obstructs the residual
    morphism that would carry the first match into the second step's
    context — and ``second_blocked`` symmetrically. The residuals are
    kept when they exist; the pair is dependent when either is missing.
    """

    dependent: bool
    first_blocked: tuple[Element, ...]
    second_blocked: tuple[Element, ...]
    residual_first: EGraphMorphism | None = None
    residual_second: EGraphMorphism | None = None

    def __bool__(self) -> bool:
        return self.dependent


def _residual(
    match: EGraphMorphism, embedding: EGraphMorphism
) -> tuple[EGraphMorphism | None, tuple[Element, ...]]:
    """Factor ``match`` through the context ``embedding`` if possible."""
    context = embedding.source
    blocked = tuple(
        element for element in sorted(match.image()) if not context.has_element(*element)
    )
    if blocked:
        return None, blocked
    residual = make_morphism(
        match.source, context, {sort: dict(match.map_for(sort)) for sort in SORTS}
    )
    if residual.errors() or not compose(embedding, residual).same_maps(match):
        raise ConflictAnalysisError(
            "context embedding does not preserve names; cannot factor the match"
        )
    return residual, blocked


def is_parallel_dependent(d1: Derivation, d2: Derivation) -> DependenceResult:
    """Do two derivations on the same input interfere?

    They are independent exactly when each match survives the other
    step's deletions, i.e. factors through the other step's context.
    The returned evidence names the deleted elements that break the
    factorization in each direction.
    """
    d1, d2 = align_derivations(d1, d2)
    residual_first, first_blocked = _residual(d1.match, d2.context_to_input)
    residual_second, second_blocked = _residual(d2.match, d1.context_to_input)
    return DependenceResult(
        dependent=residual_first is None or residual_second is None,
        first_blocked=first_blocked,
        second_blocked=second_blocked,
        residual_first=residual_first,
        residual_second=residual_second,
    )


# -- direct confluence ---------------------------------------------------------------


@dataclass(frozen=True)
class ConfluenceWitness:
    """A successful one-step joining of two derivation results.

    ``apex`` is the protected zone: the pullback of the two context
    embeddings, i.e. everything the original steps both preserve. The
    tracking maps carry it through each closing step's context, and
    ``iso`` identifies the two final results (on their cores); together
    they certify that the joined graphs agree not just abstractly but
    element by element on the protected zone.
    """

    first: Derivation
    second: Derivation
    first_closer: Derivation
    second_closer: Derivation
    apex: EGraph
    into_first_context: EGraphMorphism
    into_second_context: EGraphMorphism
    track_first: EGraphMorphism | None
    track_second: EGraphMorphism | None
    iso: EGraphMorphism


@dataclass(frozen=True)
class ConfluenceOutcome:
    """Result of a direct-confluence check.

    ``first_closers``/``second_closers`` count the applicable closing
    derivations found on each side before tracking filters them.
    ``indeterminate`` is set when a solver gap removed a potential
    closer or isomorphism, so "no witness" may be an artifact.
    """

    witness: ConfluenceWitness | None
    indeterminate: bool = False
    first_closers: int = 0
    second_closers: int = 0

    def __bool__(self) -> bool:
        return self.witness is not None


def _conjuncts(phi: Formula) -> Iterator[Formula]:
    if isinstance(phi, And):
        for part in phi.operands:
            yield from _conjuncts(part)
    else:
        yield phi


def _solve_for(atom: Formula, candidates: set[str]) -> tuple[str, Term] | None:
    """Read an equation as a definition of one of the candidate variables."""
    if not isinstance(atom, Atom) or atom.op != "=":
        return None
    for var, term in ((atom.lhs, atom.rhs), (atom.rhs, atom.lhs)):
        if (
            isinstance(var, Var)
            and var.name in candidates
            and var.name not in term_vars(term)
        ):
            return var.name, term
    return None


def _exists_projected(names: frozenset[str], phi: Formula) -> Formula:
    """``exists names. phi`` with defined variables eliminated.

    A bound variable whose value a top-level equation determines is
    substituted away (the one-point rule), which keeps the result
    quantifier-free for the common case of rules that compute their new
    attribute values outright. Whatever cannot be eliminated stays under
    an explicit quantifier.
    """
    remaining = set(names) & free_vars(phi)
    if not remaining:
        return phi
    parts = list(_conjuncts(phi))
    progress = True
    while progress and remaining:
        progress = False
        for index, part in enumerate(parts):
            solved = _solve_for(part, remaining)
            if solved is None:
                continue
            name, term = solved
            del parts[index]
            parts = [substitute(p, {name: term}) for p in parts]
            remaining.discard(name)
            progress = True
            break
    body = conjoin(parts) if parts else TRUE
    remaining &= free_vars(body)
    if remaining:
        return Quantifier("exists", tuple(sorted(remaining)), body)
    return body


def _covers_all_instances(step: Derivation, solver: Solver) -> bool | None:
    """Does this narrowing step apply to every instance of its input?

    The narrowed formula may cut the instance set down: the rewritten
    graph then only represents *some* of the graphs the input stood for,
    and using such a step as a joining witness would falsely clear
    instances it does not cover. Admissible closings must let every
    input instance choose values for the freshly materialized labels:
    input formula => exists fresh. instantiated rule formula.
    """
    instantiated = substitute(step.rule.formula, dict(step.match.label_map))
    goal = _exists_projected(frozenset(step.fresh_labels), instantiated)
    return solver.implies(step.input.formula, goal)


def _closing_derivations(
    rule: Rule,
    host: SymbolicGraph,
    solver: Solver,
    mode: str,
    max_fresh: int | None,
) -> tuple[list[Derivation], bool]:
    """All applicable one-step closings of ``host`` by ``rule``.

    In narrowing mode a closing qualifies only when it covers all
    instances of the host; consistent-but-partial rewrites are dropped
    because they cannot witness confluence for the instances outside
    their narrowed formula.
    """
    unsure = False
    closers: list[Derivation] = []
    if mode == "symbolic":
        before = solver.stats.unknown
        matches = find_symbolic_matches(rule, host, solver)
        unsure = solver.stats.unknown > before
        for match in matches:
            try:
                closers.append(apply_symbolic(match))
            except GluingViolation:
                continue
    else:
        for match in find_narrowing_matches(rule, host, max_fresh=max_fresh):
            try:
                step = apply_narrowing(match, solver)
            except GluingViolation:
                continue
            if isinstance(step, Inconsistent):
                continue
            if step.consistent is None:
                unsure = True
                continue
            covers = _covers_all_instances(step, solver)
            if covers is None:
                unsure = True
                continue
            if covers:
                closers.append(step)
    return closers, unsure


def _tracking(
    apex: EGraph,
    leg: EGraphMorphism,
    to_output: EGraphMorphism,
    closer: Derivation,
) -> EGraphMorphism | None:
    """Map the protected zone into the closing step's context, if it survives."""
    target = closer.context.egraph
    maps: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for sort, eid in apex.elements():
        name = to_output.map_for(sort)[leg.map_for(sort)[eid]]
        if not target.has_element(sort, name):
            return None
        maps[sort][eid] = name
    track = make_morphism(apex, target, maps)
    return None if track.errors() else track


def _tracks_agree(
    apex: EGraph,
    track_first: EGraphMorphism,
    first_closer: Derivation,
    track_second: EGraphMorphism,
    second_closer: Derivation,
    iso: EGraphMorphism,
) -> bool:
    """Does the isomorphism match up the two tracked copies of the zone?

    Non-label elements must correspond under the isomorphism exactly.
    Label nodes outside both cores live in the implicit pools and agree
    when neither or both are pinned to the same value; a label that is
    materialized on one side only cannot be matched up and fails.
    """
    first_out, second_out = first_closer.output, second_closer.output
    second_core_labels = set(second_out.core().egraph.label_nodes)
    for sort, eid in apex.elements():
        a = first_closer.context_to_output.map_for(sort)[track_first.map_for(sort)[eid]]
        b = second_closer.context_to_output.map_for(sort)[track_second.map_for(sort)[eid]]
        if sort != "label":
            if iso.map_for(sort).get(a) != b:
                return False
            continue
        in_first_core = a in iso.label_map
        in_second_core = b in second_core_labels
        if in_first_core and in_second_core:
            if iso.label_map[a] != b:
                return False
        elif in_first_core or in_second_core:
            return False
        elif first_out.constants.get(a) != second_out.constants.get(b):
            return False
    return True


def check_direct_confluence(
    d1: Derivation,
    d2: Derivation,
    solver: Solver,
    *,
    mode: str = "narrowing",
    max_fresh: int | None = None,
    tracking: bool = True,
) -> ConfluenceOutcome:
    """Can both results be rewritten, in one step each, to a common graph?

    Each side is closed by the other derivation's rule: the first
    result by ``d2.rule`` and the second by ``d1.rule``, with matches
    found symbolically or by narrowing per ``mode``. With ``tracking``
    (the default) a witness must also preserve the protected zone —
    elements untouched by both original steps must survive both closing
    steps and meet under the final isomorphism. Without it any joining
    counts.

    Closers or isomorphisms lost to solver gaps never produce a
    witness; they set ``indeterminate`` on the outcome instead.
    """
    if mode not in ("symbolic", "narrowing"):
        raise ConflictAnalysisError(f"unknown confluence mode {mode!r}")
    d1, d2 = align_derivations(d1, d2)
    protected: Span = pullback(cospan(d1.context_to_input, d2.context_to_input))
    apex = protected.apex
    first_closers, unsure_first = _closing_derivations(
        d2.rule, d1.output, solver, mode, max_fresh
    )
    second_closers, unsure_second = _closing_derivations(
        d1.rule, d2.output, solver, mode, max_fresh
    )
    indeterminate = unsure_first or unsure_second

    if tracking:
        tracked_first = [
            (closer, track)
            for closer in first_closers
            if (track := _tracking(apex, protected.left, d1.context_to_output, closer))
            is not None
        ]
        tracked_second = [
            (closer, track)
            for closer in second_closers
            if (track := _tracking(apex, protected.right, d2.context_to_output, closer))
            is not None
        ]
    else:
        tracked_first = [(closer, None) for closer in first_closers]
        tracked_second = [(closer, None) for closer in second_closers]

    for first_closer, track_first in tracked_first:
        for second_closer, track_second in tracked_second:
            for iso, unknown in iso_candidates(
                first_closer.output, second_closer.output, solver
            ):
                if unknown:
                    indeterminate = True
                    continue
                if tracking and not _tracks_agree(
                    apex, track_first, first_closer, track_second, second_closer, iso
                ):
                    continue
                witness = ConfluenceWitness(
                    first=d1,
                    second=d2,
                    first_closer=first_closer,
                    second_closer=second_closer,
                    apex=apex,
                    into_first_context=protected.left,
                    into_second_context=protected.right,
                    track_first=track_first,
                    track_second=track_second,
                    iso=iso,
                )
                return ConfluenceOutcome(
                    witness=witness,
                    indeterminate=indeterminate,
                    first_closers=len(first_closers),
                    second_closers=len(second_closers),
                )
    return ConfluenceOutcome(
        witness=None,
        indeterminate=indeterminate,
        first_closers=len(first_closers),
        second_closers=len(second_closers),
    )


# -- pair classification -------------------------------------------------------------


@dataclass(frozen=True)
class OverlapReport:
    """Classification of a single overlap candidate.

    ``indeterminate`` marks entries whose classification leaned on an
    undecided solver query; for an ``NcpPair`` this means the conflict
    may be an over-approximation.
    """

    candidate: OverlapCandidate
    classification: str
    indeterminate: bool = False
    first_derivation: Derivation | None = None
    second_derivation: Derivation | None = None
    dependence: DependenceResult | None = None
    confluence: ConfluenceOutcome | None = None


@dataclass(frozen=True)
class PairReport:
    """Outcome of statically analyzing one ordered rule pair.

    ``gluing_skipped`` counts overlaps on which one of the rules is not
    applicable at all (deletion blocked); such overlaps embed into no
    host on which both rules apply, so they carry no conflict.
    """

    first: str
    second: str
    mode: str
    entries: tuple[OverlapReport, ...]
    verdict: str
    gluing_skipped: int = 0
    solver_stats: Mapping[str, int] = field(default_factory=dict)

    @property
    def conflicting(self) -> bool:
        return self.verdict == CONFLICTING

    @property
    def conflicts(self) -> tuple[OverlapReport, ...]:
        return tuple(e for e in self.entries if e.classification == NCP_PAIR)


def classify_pair(
    r1: Rule,
    r2: Rule,
    solver: Solver | None = None,
    *,
    mode: str = "narrowing",
    max_fresh: int | None = None,
) -> PairReport:
    """Statically classify every overlap of an ordered rule pair.

    Per overlap: an unsatisfiable combined formula short-circuits to
    ``FormulaUnsatisfiable``; otherwise both rules are applied on the
    overlap and non-interfering pairs are ``ParallelIndependent``;
    interfering pairs are checked for direct confluence (narrowing
    closings by default) and end up ``DirectlyConfluent`` or, failing
    that, ``NcpPair``. The verdict is ``conflicting`` exactly when an
    ``NcpPair`` entry exists. Solver gaps only ever push entries toward
    ``NcpPair`` and are flagged ``indeterminate``, so the verdict
    over-approximates conflicts rather than missing them.
    """
    own_solver = solver is None
    solver = solver if solver is not None else Solver()
    try:
        before = solver.stats.as_dict()
        entries: list[OverlapReport] = []
        skipped = 0
        for candidate in enumerate_overlaps(r1, r2):
            sat = solver.satisfiable(candidate.sk.full_formula())
            if sat is False:
                entries.append(OverlapReport(candidate, FORMULA_UNSATISFIABLE))
                continue
            unsure = sat is None
            try:
                d1 = apply_symbolic(SymbolicMatch(r1, candidate.sk, candidate.o1))
                d2 = apply_symbolic(SymbolicMatch(r2, candidate.sk, candidate.o2))
            except GluingViolation:
                skipped += 1
                continue
            dependence = is_parallel_dependent(d1, d2)
            if not dependence:
                entries.append(
                    OverlapReport(
                        candidate, PARALLEL_INDEPENDENT, unsure, d1, d2, dependence
                    )
                )
                continue
            outcome = check_direct_confluence(
                d1, d2, solver, mode=mode, max_fresh=max_fresh
            )
            entries.append(
                OverlapReport(
                    candidate,
                    DIRECTLY_CONFLUENT if outcome else NCP_PAIR,
                    unsure or (not outcome and outcome.indeterminate),
                    d1,
                    d2,
                    dependence,
                    outcome,
                )
            )
        after = solver.stats.as_dict()
        verdict = (
            CONFLICTING
            if any(entry.classification == NCP_PAIR for entry in entries)
            else NON_CONFLICTING
        )
        return PairReport(
            first=r1.name,
            second=r2.name,
            mode=mode,
            entries=tuple(entries),
            verdict=verdict,
            gluing_skipped=skipped,
            solver_stats={key: after[key] - before[key] for key in after},
        )
    finally:
        if own_solver:
            solver.close()


# -- embedding minimal pairs into host derivations -------------------------------------


class Embedding(NamedTuple):
    """Witness that a minimal derivation pair occurs inside a larger one."""

    f: EGraphMorphism
    g: EGraphMorphism
    h: EGraphMorphism


def _validated_embedding(
    maps: dict[str, dict[str, str]],
    source: SymbolicGraph,
    target: SymbolicGraph,
    solver: Solver,
) -> EGraphMorphism | None:
    morphism = make_morphism(source.egraph, target.egraph, maps)
    if morphism.errors() or not morphism.satisfies(MATCH_SPEC):
        return None
    if validate_symbolic_morphism(morphism, source, target, solver) is not True:
        return None
    return morphism


def _result_embedding(
    small: Derivation,
    large: Derivation,
    f: EGraphMorphism,
    solver: Solver,
) -> EGraphMorphism | None:
    """Carry the input embedding ``f`` across one derivation square.

    The small result is jointly covered by its comatch and its context,
    so the map is forced: through the shared rule's right-hand side on
    the comatch part, and through ``f`` on the preserved part — which
    must land inside the large step's context for the squares to
    commute.
    """
    maps: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for sort in SORTS:
        small_co = small.comatch.map_for(sort)
        large_co = large.comatch.map_for(sort)
        for rhs_id, out_id in small_co.items():
            maps[sort][out_id] = large_co[rhs_id]
    for sort, context_id in small.context.egraph.elements():
        out_name = small.context_to_output.map_for(sort)[context_id]
        in_name = small.context_to_input.map_for(sort)[context_id]
        mapped_in = f.map_for(sort)[in_name]
        if not large.context.egraph.has_element(sort, mapped_in):
            return None
        mapped_out = large.context_to_output.map_for(sort)[mapped_in]
        if maps[sort].setdefault(out_name, mapped_out) != mapped_out:
            return None
    return _validated_embedding(maps, small.output, large.output, solver)


def embeds(
    der_k: tuple[Derivation, Derivation],
    der_g: tuple[Derivation, Derivation],
    solver: Solver,
) -> Embedding | None:
    """Embed one derivation pair into another over a larger host.

    Both pairs must apply the same two rules in the same order. The
    embedding, when it exists, is unique and forced pointwise: the two
    matches of ``der_g`` dictate ``f`` on the joint image of the
    ``der_k`` matches (elements outside it embed by name, which covers
    self-embedding; minimal overlap contexts are jointly covered
    anyway), and each result map is dictated by ``f`` and the comatches.
    The forced maps are validated structurally and against the
    formulas; a clash anywhere means no embedding exists.
    """
    k1, k2 = align_derivations(*der_k)
    g1, g2 = align_derivations(*der_g)
    if k1.rule != g1.rule or k2.rule != g2.rule:
        return None

    fmaps: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for small, large in ((k1, g1), (k2, g2)):
        for sort in SORTS:
            large_map = large.match.map_for(sort)
            for lhs_id, small_id in small.match.map_for(sort).items():
                want = large_map[lhs_id]
                if fmaps[sort].setdefault(small_id, want) != want:
                    return None
    for sort, eid in k1.input.egraph.elements():
        if eid not in fmaps[sort]:
            if not g1.input.egraph.has_element(sort, eid):
                return None
            fmaps[sort][eid] = eid

    f = _validated_embedding(fmaps, k1.input, g1.input, solver)
    if f is None:
        return None
    g = _result_embedding(k1, g1, f, solver)
    if g is None:
        return None
    h = _result_embedding(k2, g2, f, solver)
    if h is None:
        return None
    return Embedding(f=f, g=g, h=h)
