"""Limit and colimit constructions over e-graphs.

Pushouts glue two graphs along a shared interface; pushout complements
carve the interface image out of a host graph (the deletion half of a
rewrite step) and report gluing violations when that is impossible;
pullbacks intersect two graphs over a common codomain. All three return
the constructed graph together with its boundary morphisms.

Element naming is deterministic. A pushout keeps the names of the right
leg's codomain (the host/context side in rewriting), so untouched host
elements come out of a rewrite step under their original names; fresh
names that collide pick up a ``~2``, ``~3``, ... suffix.
"""

from __future__ import annotations

from dataclasses import dataclass

from .egraph import (
    SORTS,
    EGraph,
    EGraphError,
    EGraphMorphism,
    inclusion,
    make_morphism,
    subgraph,
)


@dataclass(frozen=True)
class Span:
    """Two morphisms out of a shared apex: B <- A -> C."""

    apex: EGraph
    left: EGraphMorphism
    right: EGraphMorphism

    def __post_init__(self):
        if self.left.source != self.apex or self.right.source != self.apex:
            raise EGraphError("span legs must start at the apex graph")


def span(left: EGraphMorphism, right: EGraphMorphism) -> Span:
    """Span from two morphisms that already share a source."""
    if left.source != right.source:
        raise EGraphError("span legs must share their source graph")
    return Span(apex=left.source, left=left, right=right)


@dataclass(frozen=True)
class Cospan:
    """Two morphisms into a shared target: B -> A <- C."""

    target: EGraph
    left: EGraphMorphism
    right: EGraphMorphism

    def __post_init__(self):
        if self.left.target != self.target or self.right.target != self.target:
            raise EGraphError("cospan legs must end at the target graph")


def cospan(left: EGraphMorphism, right: EGraphMorphism) -> Cospan:
    """Cospan from two morphisms that already share a target."""
    if left.target != right.target:
        raise EGraphError("cospan legs must share their target graph")
    return Cospan(target=left.target, left=left, right=right)


@dataclass(frozen=True)
class ComplementResult:
    """Context graph of a deletion step, K -> D -> G."""

    context: EGraph
    interface_embedding: EGraphMorphism  # K -> D
    context_embedding: EGraphMorphism    # D -> G


class GluingViolation(EGraphError):
    """The match cannot be completed to a pushout complement.

    ``dangling`` lists host elements that would be orphaned by the
    deletion; ``identification`` lists pattern elements identified with
    an element slated for deletion.
    """

    def __init__(self, dangling=(), identification=()):
        self.dangling = tuple(dangling)
        self.identification = tuple(identification)
        parts = []
        if self.dangling:
            parts.append(f"dangling: {', '.join(map(str, self.dangling))}")
        if self.identification:
            parts.append(f"identification: {', '.join(map(str, self.identification))}")
        super().__init__("; ".join(parts) or "gluing violation")


def allocate_name(preferred: str, used: set[str]) -> str:
    """Pick ``preferred`` or its first free ``~k`` variant."""
    if preferred not in used:
        return preferred
    suffix = 2
    while f"{preferred}~{suffix}" in used:
        suffix += 1
    return f"{preferred}~{suffix}"


# -- pushout -------------------------------------------------------------------


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, item):
        self.parent.setdefault(item, item)

    def find(self, item):
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller key wins so representatives are input-order independent
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def pushout(sp: Span) -> Cospan:
    """Glue the two leg targets along the span apex.

    Merged attribute tags must agree (an untagged side defers to a
    tagged one); genuinely conflicting tags raise.
    """
    f, g = sp.left, sp.right
    graph_b, graph_c = f.target, g.target

    uf = _UnionFind()
    for sort in SORTS:
        for eid in graph_b.ids(sort):
            uf.add(("L", sort, eid))
        for eid in graph_c.ids(sort):
            uf.add(("R", sort, eid))
    for sort in SORTS:
        for eid in sp.apex.ids(sort):
            uf.union(("L", sort, f.apply(sort, eid)), ("R", sort, g.apply(sort, eid)))

    classes: dict[tuple, list[tuple]] = {}
    for member in uf.parent:
        classes.setdefault(uf.find(member), []).append(member)

    # name every class: host-side (right leg) names take precedence and
    # are assigned first so they never get bumped by a fresh collision
    class_name: dict[tuple, str] = {}
    for sort in SORTS:
        used: set[str] = set()
        ordered = []
        for rep, members in classes.items():
            if rep[1] != sort:
                continue
            right_ids = sorted(eid for side, _, eid in members if side == "R")
            left_ids = sorted(eid for side, _, eid in members if side == "L")
            if right_ids:
                ordered.append(((0, right_ids[0]), rep, right_ids[0]))
            else:
                ordered.append(((1, left_ids[0]), rep, left_ids[0]))
        for _, rep, preferred in sorted(ordered):
            name = allocate_name(preferred, used)
            used.add(name)
            class_name[rep] = name

    def name_of(side: str, sort: str, eid: str) -> str:
        return class_name[uf.find((side, sort, eid))]

    def merged_tag(members) -> str | None:
        tag = None
        for side, sort, eid in sorted(members):
            graph = graph_b if side == "L" else graph_c
            candidate = graph.label_tag(sort, eid)
            if candidate is None:
                continue
            if tag is None:
                tag = candidate
            elif tag != candidate:
                raise EGraphError(
                    f"pushout merges label edges with conflicting tags {tag!r} and {candidate!r}"
                )
        return tag

    nodes = []
    edges = {}
    labels = []
    node_labels = {}
    edge_labels = {}
    for rep, members in classes.items():
        side, sort, eid = min(members)
        graph = graph_b if side == "L" else graph_c
        name = class_name[rep]
        if sort == "node":
            nodes.append(name)
        elif sort == "label":
            labels.append(name)
        elif sort == "edge":
            src, tgt = graph.edges[eid]
            edges[name] = (name_of(side, "node", src), name_of(side, "node", tgt))
        elif sort == "node_label":
            carrier, label, _ = graph.node_labels[eid]
            node_labels[name] = (
                name_of(side, "node", carrier),
                name_of(side, "label", label),
                merged_tag(members),
            )
        else:
            carrier, label, _ = graph.edge_labels[eid]
            edge_labels[name] = (
                name_of(side, "edge", carrier),
                name_of(side, "label", label),
                merged_tag(members),
            )

    apex = EGraph(
        nodes=nodes,
        edges=edges,
        label_nodes=labels,
        node_labels=node_labels,
        edge_labels=edge_labels,
    )
    left = make_morphism(
        graph_b,
        apex,
        {
            sort: {eid: name_of("L", sort, eid) for eid in graph_b.ids(sort)}
            for sort in SORTS
        },
    )
    right = make_morphism(
        graph_c,
        apex,
        {
            sort: {eid: name_of("R", sort, eid) for eid in graph_c.ids(sort)}
            for sort in SORTS
        },
    )
    return Cospan(target=apex, left=left, right=right)


def pushout_mediator(
    po: Cospan,
    left_candidate: EGraphMorphism,
    right_candidate: EGraphMorphism,
) -> EGraphMorphism | None:
    """Unique morphism out of the pushout object commuting with a candidate cocone.

    Returns None when the candidates disagree on merged elements or the
    induced mapping is not a morphism.
    """
    if left_candidate.target != right_candidate.target:
        return None
    maps: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for leg, candidate in ((po.left, left_candidate), (po.right, right_candidate)):
        for sort in SORTS:
            for eid in leg.source.ids(sort):
                key = leg.apply(sort, eid)
                value = candidate.apply(sort, eid)
                if maps[sort].setdefault(key, value) != value:
                    return None
    mediator = make_morphism(po.target, left_candidate.target, maps)
    return mediator if not mediator.errors() else None


# -- pushout complement ----------------------------------------------------------


def pushout_complement(rule_leg: EGraphMorphism, match: EGraphMorphism) -> ComplementResult:
    """Remove the match image of L outside the interface K from the host.

    ``rule_leg`` is K -> L, ``match`` is L -> G. Raises GluingViolation
    when deletion would orphan host elements (dangling) or the match
    identifies a deleted element with anything else (identification).
    """
    if rule_leg.target != match.source:
        raise EGraphError("pushout complement needs composable K -> L -> G")
    pattern = rule_leg.target
    host = match.target

    preserved: dict[str, set[str]] = {}  # host elements hit through K
    deleted: dict[str, set[str]] = {}    # host elements slated for removal
    identification = []
    for sort in SORTS:
        interface_image = {rule_leg.apply(sort, eid) for eid in rule_leg.source.ids(sort)}
        preserved[sort] = {match.apply(sort, eid) for eid in interface_image}
        deleted[sort] = set()
        by_target: dict[str, list[str]] = {}
        for eid in pattern.ids(sort):
            by_target.setdefault(match.apply(sort, eid), []).append(eid)
        for target_id, sources in sorted(by_target.items()):
            outside = [eid for eid in sources if eid not in interface_image]
            if outside and (len(sources) > 1 or target_id in preserved[sort]):
                identification.append((sort, target_id, tuple(sorted(sources))))
            elif outside:
                deleted[sort].add(target_id)

    dangling = []
    for eid, (src, tgt) in host.edges.items():
        if eid in deleted["edge"]:
            continue
        if src in deleted["node"] or tgt in deleted["node"]:
            dangling.append(("edge", eid))
    for eid, (carrier, label, _) in host.node_labels.items():
        if eid in deleted["node_label"]:
            continue
        if carrier in deleted["node"] or label in deleted["label"]:
            dangling.append(("node_label", eid))
    for eid, (carrier, label, _) in host.edge_labels.items():
        if eid in deleted["edge_label"]:
            continue
        if carrier in deleted["edge"] or label in deleted["label"]:
            dangling.append(("edge_label", eid))

    if dangling or identification:
        raise GluingViolation(dangling=dangling, identification=identification)

    keep = {
        sort: [eid for eid in host.ids(sort) if eid not in deleted[sort]]
        for sort in SORTS
    }
    context = subgraph(host, keep)
    interface_embedding = make_morphism(
        rule_leg.source,
        context,
        {
            sort: {
                eid: match.apply(sort, rule_leg.apply(sort, eid))
                for eid in rule_leg.source.ids(sort)
            }
            for sort in SORTS
        },
    )
    problems = interface_embedding.errors()
    if problems:
        raise EGraphError(f"pushout complement produced a bad embedding: {problems[0]}")
    return ComplementResult(
        context=context,
        interface_embedding=interface_embedding,
        context_embedding=inclusion(context, host),
    )


# -- pullback ---------------------------------------------------------------------


def pullback(cs: Cospan) -> Span:
    """Fibered product of the two leg sources over the shared target.

    Elements are pairs that agree in the target; a pair of equally named
    elements keeps that name, otherwise the names are joined with ``&``.
    A pair's attribute tag is the more specific of the two sides.
    """
    f, g = cs.left, cs.right
    graph_b, graph_c = f.source, g.source

    pair_name: dict[tuple[str, str, str], str] = {}
    pairs: dict[str, list[tuple[str, str]]] = {}
    for sort in SORTS:
        used: set[str] = set()
        pairs[sort] = []
        image_c: dict[str, list[str]] = {}
        for eid in graph_c.ids(sort):
            image_c.setdefault(g.apply(sort, eid), []).append(eid)
        for b_id in graph_b.ids(sort):
            for c_id in sorted(image_c.get(f.apply(sort, b_id), ())):
                preferred = b_id if b_id == c_id else f"{b_id}&{c_id}"
                name = allocate_name(preferred, used)
                used.add(name)
                pair_name[(sort, b_id, c_id)] = name
                pairs[sort].append((b_id, c_id))

    def pair_tag(sort: str, b_id: str, c_id: str) -> str | None:
        tag_b = graph_b.label_tag(sort, b_id)
        return tag_b if tag_b is not None else graph_c.label_tag(sort, c_id)

    nodes = [pair_name[("node", b, c)] for b, c in pairs["node"]]
    labels = [pair_name[("label", b, c)] for b, c in pairs["label"]]
    edges = {}
    for b, c in pairs["edge"]:
        src = pair_name[("node", graph_b.edges[b][0], graph_c.edges[c][0])]
        tgt = pair_name[("node", graph_b.edges[b][1], graph_c.edges[c][1])]
        edges[pair_name[("edge", b, c)]] = (src, tgt)
    node_labels = {}
    for b, c in pairs["node_label"]:
        carrier = pair_name[("node", graph_b.node_labels[b][0], graph_c.node_labels[c][0])]
        label = pair_name[("label", graph_b.node_labels[b][1], graph_c.node_labels[c][1])]
        node_labels[pair_name[("node_label", b, c)]] = (carrier, label, pair_tag("node_label", b, c))
    edge_labels = {}
    for b, c in pairs["edge_label"]:
        carrier = pair_name[("edge", graph_b.edge_labels[b][0], graph_c.edge_labels[c][0])]
        label = pair_name[("label", graph_b.edge_labels[b][1], graph_c.edge_labels[c][1])]
        edge_labels[pair_name[("edge_label", b, c)]] = (carrier, label, pair_tag("edge_label", b, c))

    apex = EGraph(
        nodes=nodes,
        edges=edges,
        label_nodes=labels,
        node_labels=node_labels,
        edge_labels=edge_labels,
    )
    left = make_morphism(
        apex,
        graph_b,
        {
            sort: {pair_name[(sort, b, c)]: b for b, c in pairs[sort]}
            for sort in SORTS
        },
    )
    right = make_morphism(
        apex,
        graph_c,
        {
            sort: {pair_name[(sort, b, c)]: c for b, c in pairs[sort]}
            for sort in SORTS
        },
    )
    return Span(apex=apex, left=left, right=right)


def pullback_mediator(
    pb: Span,
    left_candidate: EGraphMorphism,
    right_candidate: EGraphMorphism,
) -> EGraphMorphism | None:
    """Unique morphism into the apex commuting with a candidate cone."""
    if left_candidate.source != right_candidate.source:
        return None
    reverse: dict[tuple[str, str, str], str] = {}
    for sort in SORTS:
        for eid in pb.apex.ids(sort):
            reverse[(sort, pb.left.apply(sort, eid), pb.right.apply(sort, eid))] = eid
    maps: dict[str, dict[str, str]] = {sort: {} for sort in SORTS}
    for sort in SORTS:
        for eid in left_candidate.source.ids(sort):
            key = (sort, left_candidate.apply(sort, eid), right_candidate.apply(sort, eid))
            if key not in reverse:
                return None
            maps[sort][eid] = reverse[key]
    mediator = make_morphism(left_candidate.source, pb.apex, maps)
    return mediator if not mediator.errors() else None
