"""Morphism enumeration between e-graphs.

The search is a backtracking walk over all five element sorts at once.
Pattern elements become integer variables, host elements integer
candidates, and the edge/label incidence relations become binary
constraints checked at assignment time. The inner loop lives in a
kernel module: a compiled Cython version when the extension built, an
interpreted twin otherwise. Set ``SYGRA_PURE_PYTHON=1`` to force the
interpreted kernel.

Results are returned in a canonical order (sorted by the tuple of image
ids over the pattern's canonical element order), so every caller sees
the same list on every run regardless of kernel.
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping

from . import _match_py
from .egraph import (
    ANY_SPEC,
    ISO_SPEC,
    SORTS,
    EGraph,
    EGraphMorphism,
    Element,
    InjectivitySpec,
    tags_compatible,
)

_compiled = None
if not os.environ.get("SYGRA_PURE_PYTHON"):
    try:
        from . import _match_cy as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None


def active_kernel_name() -> str:
    return "compiled" if _compiled is not None else "pure"


def _kernel(name: str | None):
    if name in (None, "auto"):
        return _compiled if _compiled is not None else _match_py
    if name == "pure":
        return _match_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled matching kernel is not available")
        return _compiled
    raise ValueError(f"unknown kernel {name!r}")


# Relation codes shared with the kernels.
_EDGE_SRC, _EDGE_TGT, _NL_CARRIER, _NL_LABEL, _EL_CARRIER, _EL_LABEL = range(6)


class _Problem:
    """Integer encoding of one pattern-into-host search."""

    __slots__ = (
        "pattern", "host", "p_ids", "h_ids", "h_index",
        "var_sort", "domains", "checks", "order", "rel", "inj", "host_counts",
        "empty",
    )

    def __init__(
        self,
        pattern: EGraph,
        host: EGraph,
        spec: InjectivitySpec,
        restrict: Mapping[Element, Iterable[str]] | None,
    ):
        self.pattern = pattern
        self.host = host
        self.p_ids = [list(pattern.ids(sort)) for sort in SORTS]
        self.h_ids = [list(host.ids(sort)) for sort in SORTS]
        self.h_index = [
            {eid: idx for idx, eid in enumerate(ids)} for ids in self.h_ids
        ]
        self.host_counts = [len(ids) for ids in self.h_ids]
        self.empty = False

        # Bijective sorts need equal cardinalities; injective needs enough room.
        self.inj = []
        for rank, sort in enumerate(SORTS):
            mode = spec.mode(sort)
            self.inj.append(1 if mode in ("injective", "bijective") else 0)
            if mode == "bijective" and len(self.p_ids[rank]) != self.host_counts[rank]:
                self.empty = True
            if mode == "injective" and len(self.p_ids[rank]) > self.host_counts[rank]:
                self.empty = True

        # Global variable numbering: pattern elements in canonical order.
        offsets = []
        total = 0
        for rank in range(len(SORTS)):
            offsets.append(total)
            total += len(self.p_ids[rank])
        self.var_sort = []
        for rank in range(len(SORTS)):
            self.var_sort.extend([rank] * len(self.p_ids[rank]))

        p_index = [
            {eid: offsets[rank] + idx for idx, eid in enumerate(self.p_ids[rank])}
            for rank in range(len(SORTS))
        ]

        # Host relation tables.
        node_at = self.h_index[0]
        edge_at = self.h_index[1]
        label_at = self.h_index[2]
        rel_edge_src, rel_edge_tgt = [], []
        for eid in self.h_ids[1]:
            src, tgt = host.edges[eid]
            rel_edge_src.append(node_at[src])
            rel_edge_tgt.append(node_at[tgt])
        rel_nl_carrier, rel_nl_label = [], []
        for lid in self.h_ids[3]:
            carrier, label, _ = host.node_labels[lid]
            rel_nl_carrier.append(node_at[carrier])
            rel_nl_label.append(label_at[label])
        rel_el_carrier, rel_el_label = [], []
        for lid in self.h_ids[4]:
            carrier, label, _ = host.edge_labels[lid]
            rel_el_carrier.append(edge_at[carrier])
            rel_el_label.append(label_at[label])
        self.rel = [
            rel_edge_src, rel_edge_tgt,
            rel_nl_carrier, rel_nl_label,
            rel_el_carrier, rel_el_label,
        ]

        # Constraint triples (relation, carrier var, endpoint var).
        self.checks = [[] for _ in range(total)]

        def constrain(relation: int, carrier: int, endpoint: int) -> None:
            triple = (relation, carrier, endpoint)
            self.checks[carrier].extend(triple)
            self.checks[endpoint].extend(triple)

        for eid in self.p_ids[1]:
            src, tgt = pattern.edges[eid]
            constrain(_EDGE_SRC, p_index[1][eid], p_index[0][src])
            constrain(_EDGE_TGT, p_index[1][eid], p_index[0][tgt])
        for lid in self.p_ids[3]:
            carrier, label, _ = pattern.node_labels[lid]
            constrain(_NL_CARRIER, p_index[3][lid], p_index[0][carrier])
            constrain(_NL_LABEL, p_index[3][lid], p_index[2][label])
        for lid in self.p_ids[4]:
            carrier, label, _ = pattern.edge_labels[lid]
            constrain(_EL_CARRIER, p_index[4][lid], p_index[1][carrier])
            constrain(_EL_LABEL, p_index[4][lid], p_index[2][label])

        # Candidate domains: tag-compatible, optionally restricted by caller.
        self.domains = []
        for rank in range(len(SORTS)):
            sort = SORTS[rank]
            for eid in self.p_ids[rank]:
                candidates = list(range(self.host_counts[rank]))
                if sort == "node_label":
                    tag = pattern.node_labels[eid][2]
                    candidates = [
                        idx for idx in candidates
                        if tags_compatible(tag, host.node_labels[self.h_ids[3][idx]][2])
                    ]
                elif sort == "edge_label":
                    tag = pattern.edge_labels[eid][2]
                    candidates = [
                        idx for idx in candidates
                        if tags_compatible(tag, host.edge_labels[self.h_ids[4][idx]][2])
                    ]
                if restrict is not None and (sort, eid) in restrict:
                    allowed = {
                        self.h_index[rank][h]
                        for h in restrict[(sort, eid)]
                        if h in self.h_index[rank]
                    }
                    candidates = [idx for idx in candidates if idx in allowed]
                if not candidates:
                    self.empty = True
                self.domains.append(candidates)

        self.order = self._static_order(total)

    def _static_order(self, total: int) -> list[int]:
        """Most-constrained-first order seeded by connectivity."""
        neighbours: list[set[int]] = [set() for _ in range(total)]
        for var, triples in enumerate(self.checks):
            for i in range(0, len(triples), 3):
                for other in (triples[i + 1], triples[i + 2]):
                    if other != var:
                        neighbours[var].add(other)

        remaining = set(range(total))
        order: list[int] = []
        placed: set[int] = set()
        while remaining:
            best = None
            best_key = None
            for var in remaining:
                key = (
                    len(neighbours[var] & placed),
                    len(neighbours[var]),
                    -len(self.domains[var]),
                    -self.var_sort[var],
                    -var,
                )
                if best_key is None or key > best_key:
                    best, best_key = var, key
            order.append(best)
            placed.add(best)
            remaining.remove(best)
        return order

    def morphism_from(self, assignment: tuple[int, ...]) -> EGraphMorphism:
        maps: dict[str, dict[str, str]] = {}
        cursor = 0
        field_names = ("node_map", "edge_map", "label_map", "node_label_map", "edge_label_map")
        for rank in range(len(SORTS)):
            ids = self.p_ids[rank]
            maps[field_names[rank]] = {
                eid: self.h_ids[rank][assignment[cursor + idx]]
                for idx, eid in enumerate(ids)
            }
            cursor += len(ids)
        return EGraphMorphism(source=self.pattern, target=self.host, **maps)


def find_morphisms(
    pattern: EGraph,
    host: EGraph,
    spec: InjectivitySpec = ANY_SPEC,
    restrict: Mapping[Element, Iterable[str]] | None = None,
    kernel: str | None = None,
) -> list[EGraphMorphism]:
    """All structure-preserving maps from pattern to host under spec.

    ``restrict`` optionally narrows the allowed images of individual
    pattern elements, keyed by (sort, id). The result is sorted by the
    tuple of image ids over the pattern's canonical element order.
    """
    problem = _Problem(pattern, host, spec, restrict)
    if problem.empty:
        return []
    engine = _kernel(kernel)
    assignments = engine.search(
        problem.order,
        problem.domains,
        problem.var_sort,
        problem.checks,
        problem.rel,
        problem.inj,
        problem.host_counts,
    )
    morphisms = [problem.morphism_from(assignment) for assignment in assignments]
    morphisms.sort(key=EGraphMorphism.image_key)
    return morphisms


def enumerate_isomorphisms(
    g: EGraph,
    h: EGraph,
    restrict: Mapping[tuple[str, str], Iterable[str]] | None = None,
    kernel: str | None = None,
) -> list[EGraphMorphism]:
    """All isomorphisms between two e-graphs (bijective on every sort)."""
    return find_morphisms(g, h, ISO_SPEC, restrict=restrict, kernel=kernel)


def are_isomorphic(g: EGraph, h: EGraph) -> bool:
    return bool(enumerate_isomorphisms(g, h))
