"""Attributed graphs with explicit label structure.

An e-graph has five sorts of elements: graph nodes, graph edges, label
nodes, node-label edges and edge-label edges. Label nodes double as the
variables of the attribute algebra; a node-label edge attaches a label
node to a graph node and an edge-label edge attaches one to a graph
edge. Label edges optionally carry an attribute-name tag so a node can
hold several named attributes.

Instances are immutable: every operation that "changes" a graph builds
a new one. Ids are opaque strings, unique within their sort. Canonical
element order is (sort rank, id), which every enumeration in the
package respects so results are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

SORTS = ("node", "edge", "label", "node_label", "edge_label")
_SORT_RANK = {name: rank for rank, name in enumerate(SORTS)}

Element = tuple[str, str]  # (sort, id)

LabelEdge = tuple[str, str, str | None]  # (carrier id, label node id, tag)


class EGraphError(ValueError):
    """Malformed graph or morphism structure."""


def _check_id(value: str, sort: str) -> str:
    if not isinstance(value, str) or not value:
        raise EGraphError(f"{sort} id must be a non-empty string, got {value!r}")
    return value


def _normalize_label_edges(
    raw: Mapping[str, tuple] | None, sort: str
) -> dict[str, LabelEdge]:
    out: dict[str, LabelEdge] = {}
    for key in sorted(raw or {}):
        entry = (raw or {})[key]
        if len(entry) == 2:
            carrier, label = entry
            tag = None
        elif len(entry) == 3:
            carrier, label, tag = entry
        else:
            raise EGraphError(f"{sort} entry {key!r} must be (carrier, label[, tag])")
        if tag is not None and not isinstance(tag, str):
            raise EGraphError(f"{sort} tag on {key!r} must be a string or None")
        out[_check_id(key, sort)] = (carrier, label, tag)
    return out


class EGraph:
    """Immutable attributed graph over the five element sorts."""

    __slots__ = (
        "nodes",
        "edges",
        "label_nodes",
        "node_labels",
        "edge_labels",
        "_key",
        "_node_degree",
        "_hash",
    )

    def __init__(
        self,
        nodes: Iterable[str] = (),
        edges: Mapping[str, tuple[str, str]] | None = None,
        label_nodes: Iterable[str] = (),
        node_labels: Mapping[str, tuple] | None = None,
        edge_labels: Mapping[str, tuple] | None = None,
    ):
        node_list = [_check_id(n, "node") for n in nodes]
        label_list = [_check_id(x, "label") for x in label_nodes]
        if len(set(node_list)) != len(node_list):
            raise EGraphError("duplicate node ids")
        if len(set(label_list)) != len(label_list):
            raise EGraphError("duplicate label node ids")
        object.__setattr__(self, "nodes", tuple(sorted(node_list)))
        object.__setattr__(self, "label_nodes", tuple(sorted(label_list)))

        edge_map = {}
        for key in sorted(edges or {}):
            src, tgt = (edges or {})[key]
            edge_map[_check_id(key, "edge")] = (src, tgt)
        object.__setattr__(self, "edges", MappingProxyType(edge_map))
        object.__setattr__(
            self, "node_labels", MappingProxyType(_normalize_label_edges(node_labels, "node_label"))
        )
        object.__setattr__(
            self, "edge_labels", MappingProxyType(_normalize_label_edges(edge_labels, "edge_label"))
        )
        self._validate()
        key = (
            self.nodes,
            tuple(self.edges.items()),
            self.label_nodes,
            tuple(self.node_labels.items()),
            tuple(self.edge_labels.items()),
        )
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "_node_degree", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("EGraph is immutable")

    def _validate(self) -> None:
        node_set = set(self.nodes)
        label_set = set(self.label_nodes)
        for eid, (src, tgt) in self.edges.items():
            if src not in node_set:
                raise EGraphError(f"edge {eid!r} has unknown source node {src!r}")
            if tgt not in node_set:
                raise EGraphError(f"edge {eid!r} has unknown target node {tgt!r}")
        for lid, (carrier, label, _) in self.node_labels.items():
            if carrier not in node_set:
                raise EGraphError(f"node label {lid!r} has unknown node {carrier!r}")
            if label not in label_set:
                raise EGraphError(f"node label {lid!r} has unknown label node {label!r}")
        for lid, (carrier, label, _) in self.edge_labels.items():
            if carrier not in self.edges:
                raise EGraphError(f"edge label {lid!r} has unknown edge {carrier!r}")
            if label not in label_set:
                raise EGraphError(f"edge label {lid!r} has unknown label node {label!r}")

    # -- element access ----------------------------------------------------

    def ids(self, sort: str) -> tuple[str, ...]:
        if sort == "node":
            return self.nodes
        if sort == "edge":
            return tuple(self.edges)
        if sort == "label":
            return self.label_nodes
        if sort == "node_label":
            return tuple(self.node_labels)
        if sort == "edge_label":
            return tuple(self.edge_labels)
        raise EGraphError(f"unknown sort {sort!r}")

    def elements(self) -> Iterator[Element]:
        for sort in SORTS:
            for eid in self.ids(sort):
                yield (sort, eid)

    def has_element(self, sort: str, eid: str) -> bool:
        return eid in self.ids(sort)

    def element_count(self) -> int:
        return sum(len(self.ids(sort)) for sort in SORTS)

    def attached_label_nodes(self) -> frozenset[str]:
        """Label nodes referenced by at least one label edge."""
        used = {label for (_, label, _) in self.node_labels.values()}
        used |= {label for (_, label, _) in self.edge_labels.values()}
        return frozenset(used)

    def label_tag(self, sort: str, eid: str) -> str | None:
        if sort == "node_label":
            return self.node_labels[eid][2]
        if sort == "edge_label":
            return self.edge_labels[eid][2]
        raise EGraphError(f"sort {sort!r} carries no tag")

    # -- comparisons ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, EGraph):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return (
            f"EGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"labels={len(self.label_nodes)}, node_labels={len(self.node_labels)}, "
            f"edge_labels={len(self.edge_labels)})"
        )

    # -- derived views -------------------------------------------------------

    def replace(self, **changes) -> "EGraph":
        """Build a copy with the given components swapped out."""
        parts = {
            "nodes": self.nodes,
            "edges": dict(self.edges),
            "label_nodes": self.label_nodes,
            "node_labels": dict(self.node_labels),
            "edge_labels": dict(self.edge_labels),
        }
        parts.update(changes)
        return EGraph(**parts)


EMPTY_GRAPH = EGraph()


def subgraph(g: EGraph, keep: Mapping[str, Iterable[str]]) -> EGraph:
    """Restrict ``g`` to the listed elements; fails if the result dangles."""
    nodes = set(keep.get("node", g.nodes))
    edges = {e: v for e, v in g.edges.items() if e in set(keep.get("edge", g.edges))}
    labels = set(keep.get("label", g.label_nodes))
    node_labels = {
        k: v for k, v in g.node_labels.items() if k in set(keep.get("node_label", g.node_labels))
    }
    edge_labels = {
        k: v for k, v in g.edge_labels.items() if k in set(keep.get("edge_label", g.edge_labels))
    }
    return EGraph(
        nodes=nodes,
        edges=edges,
        label_nodes=labels,
        node_labels=node_labels,
        edge_labels=edge_labels,
    )


# ---------------------------------------------------------------------------
# Morphisms


_MAP_FIELDS = {
    "node": "node_map",
    "edge": "edge_map",
    "label": "label_map",
    "node_label": "node_label_map",
    "edge_label": "edge_label_map",
}


def tags_compatible(pattern_tag: str | None, host_tag: str | None) -> bool:
    """Attribute-name tags must agree when both sides carry one."""
    return pattern_tag is None or host_tag is None or pattern_tag == host_tag


@dataclass(frozen=True)
class EGraphMorphism:
    """Sort-indexed mapping between two e-graphs.

    Validity (totality, structure preservation, tag compatibility) is
    checked by :meth:`errors`; construction itself never raises so that
    candidate mappings can be inspected.
    """

    source: EGraph
    target: EGraph
    node_map: Mapping[str, str] = field(default_factory=dict)
    edge_map: Mapping[str, str] = field(default_factory=dict)
    label_map: Mapping[str, str] = field(default_factory=dict)
    node_label_map: Mapping[str, str] = field(default_factory=dict)
    edge_label_map: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for sort in SORTS:
            object.__setattr__(
                self, _MAP_FIELDS[sort], MappingProxyType(dict(self.map_for(sort)))
            )

    def map_for(self, sort: str) -> Mapping[str, str]:
        return getattr(self, _MAP_FIELDS[sort])

    def apply(self, sort: str, eid: str) -> str:
        return self.map_for(sort)[eid]

    def errors(self) -> list[str]:
        problems: list[str] = []
        for sort in SORTS:
            mapping = self.map_for(sort)
            src_ids = set(self.source.ids(sort))
            tgt_ids = set(self.target.ids(sort))
            missing = src_ids - set(mapping)
            if missing:
                problems.append(f"{sort} map is not total: missing {sorted(missing)}")
            for key, value in mapping.items():
                if key not in src_ids:
                    problems.append(f"{sort} map has unknown domain element {key!r}")
                elif value not in tgt_ids:
                    problems.append(f"{sort} map sends {key!r} to unknown {value!r}")
        if problems:
            return problems

        for eid, (src, tgt) in self.source.edges.items():
            image = self.target.edges[self.edge_map[eid]]
            if image[0] != self.node_map[src] or image[1] != self.node_map[tgt]:
                problems.append(f"edge {eid!r} endpoints are not preserved")
        for lid, (carrier, label, tag) in self.source.node_labels.items():
            image = self.target.node_labels[self.node_label_map[lid]]
            if image[0] != self.node_map[carrier] or image[1] != self.label_map[label]:
                problems.append(f"node label {lid!r} endpoints are not preserved")
            if not tags_compatible(tag, image[2]):
                problems.append(f"node label {lid!r} tag mismatch: {tag!r} vs {image[2]!r}")
        for lid, (carrier, label, tag) in self.source.edge_labels.items():
            image = self.target.edge_labels[self.edge_label_map[lid]]
            if image[0] != self.edge_map[carrier] or image[1] != self.label_map[label]:
                problems.append(f"edge label {lid!r} endpoints are not preserved")
            if not tags_compatible(tag, image[2]):
                problems.append(f"edge label {lid!r} tag mismatch: {tag!r} vs {image[2]!r}")
        return problems

    def is_valid(self) -> bool:
        return not self.errors()

    def is_injective_on(self, sort: str) -> bool:
        mapping = self.map_for(sort)
        return len(set(mapping.values())) == len(mapping)

    def is_bijective_on(self, sort: str) -> bool:
        return self.is_injective_on(sort) and set(self.map_for(sort).values()) == set(
            self.target.ids(sort)
        )

    def satisfies(self, spec: "InjectivitySpec") -> bool:
        for sort in SORTS:
            mode = spec.mode(sort)
            if mode == "injective" and not self.is_injective_on(sort):
                return False
            if mode == "bijective" and not self.is_bijective_on(sort):
                return False
        return True

    def map_element(self, element: Element) -> Element:
        sort, eid = element
        return (sort, self.apply(sort, eid))

    def image(self) -> frozenset[Element]:
        out = set()
        for sort in SORTS:
            for value in self.map_for(sort).values():
                out.add((sort, value))
        return frozenset(out)

    def image_key(self) -> tuple[str, ...]:
        """Canonical fingerprint: images of the source elements in order."""
        return tuple(
            self.apply(sort, eid) for sort in SORTS for eid in self.source.ids(sort)
        )

    def same_maps(self, other: "EGraphMorphism") -> bool:
        return all(
            dict(self.map_for(sort)) == dict(other.map_for(sort)) for sort in SORTS
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EGraphMorphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.same_maps(other)
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.image_key()))


def identity(g: EGraph) -> EGraphMorphism:
    return EGraphMorphism(
        source=g,
        target=g,
        **{
            _MAP_FIELDS[sort]: {eid: eid for eid in g.ids(sort)}
            for sort in SORTS
        },
    )


def compose(outer: EGraphMorphism, inner: EGraphMorphism) -> EGraphMorphism:
    """Composite ``outer after inner``; inner's codomain must be outer's domain."""
    if inner.target != outer.source:
        raise EGraphError("morphisms do not compose: codomain/domain mismatch")
    return EGraphMorphism(
        source=inner.source,
        target=outer.target,
        **{
            _MAP_FIELDS[sort]: {
                key: outer.apply(sort, value)
                for key, value in inner.map_for(sort).items()
            }
            for sort in SORTS
        },
    )


def commutes(f: EGraphMorphism, g: EGraphMorphism) -> bool:
    """True when two parallel morphisms agree on every element."""
    if f.source != g.source or f.target != g.target:
        return False
    return f.same_maps(g)


def make_morphism(
    source: EGraph,
    target: EGraph,
    maps: Mapping[str, Mapping[str, str]],
) -> EGraphMorphism:
    """Build a morphism from one sort-indexed mapping dictionary."""
    return EGraphMorphism(
        source=source,
        target=target,
        **{_MAP_FIELDS[sort]: dict(maps.get(sort, {})) for sort in SORTS},
    )


def inclusion(sub: EGraph, sup: EGraph) -> EGraphMorphism:
    """Identity-on-ids embedding of a subgraph."""
    morphism = EGraphMorphism(
        source=sub,
        target=sup,
        **{
            _MAP_FIELDS[sort]: {eid: eid for eid in sub.ids(sort)}
            for sort in SORTS
        },
    )
    problems = morphism.errors()
    if problems:
        raise EGraphError(f"not a subgraph: {problems[0]}")
    return morphism


# ---------------------------------------------------------------------------
# Injectivity requirements

_MODES = ("any", "injective", "bijective")


@dataclass(frozen=True)
class InjectivitySpec:
    """Per-sort constraints a morphism search must respect."""

    node: str = "any"
    edge: str = "any"
    label: str = "any"
    node_label: str = "any"
    edge_label: str = "any"

    def __post_init__(self):
        for sort in SORTS:
            if self.mode(sort) not in _MODES:
                raise EGraphError(f"bad injectivity mode {self.mode(sort)!r}")

    def mode(self, sort: str) -> str:
        return getattr(self, sort)

    @staticmethod
    def uniform(mode: str) -> "InjectivitySpec":
        return InjectivitySpec(*(mode,) * 5)


#: No constraints at all.
ANY_SPEC = InjectivitySpec.uniform("any")
#: Monomorphisms: injective on every sort.
MONO_SPEC = InjectivitySpec.uniform("injective")
#: Isomorphism candidates: bijective on every sort.
ISO_SPEC = InjectivitySpec.uniform("bijective")
#: Match morphisms: injective except on label nodes.
MATCH_SPEC = InjectivitySpec(
    node="injective", edge="injective", label="any",
    node_label="injective", edge_label="injective",
)
#: Rule-side morphisms: injective, bijective on label nodes.
RULE_SPEC = InjectivitySpec(
    node="injective", edge="injective", label="bijective",
    node_label="injective", edge_label="injective",
)
