"""E-graph construction, validation, and morphisms."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sygra.egraph import (
    ANY_SPEC,
    EMPTY_GRAPH,
    ISO_SPEC,
    MONO_SPEC,
    SORTS,
    EGraph,
    EGraphError,
    EGraphMorphism,
    compose,
    identity,
    inclusion,
    make_morphism,
    subgraph,
    tags_compatible,
)

# ---------------------------------------------------------------------------
# Construction and normalization


def test_empty_graph_defaults():
    g = EGraph()
    assert g == EMPTY_GRAPH
    for sort in SORTS:
        assert g.ids(sort) == ()
    assert g.element_count() == 0


def test_fields_are_sorted_and_value_equal():
    g1 = EGraph(
        nodes=["b", "a"],
        edges={"e2": ("a", "b"), "e1": ("b", "a")},
        label_nodes=["y", "x"],
        node_labels={"l2": ("a", "x", "val"), "l1": ("b", "y")},
    )
    g2 = EGraph(
        nodes=["a", "b"],
        edges={"e1": ("b", "a"), "e2": ("a", "b")},
        label_nodes=["x", "y"],
        node_labels={"l1": ("b", "y"), "l2": ("a", "x", "val")},
    )
    assert g1 == g2
    assert hash(g1) == hash(g2)
    assert g1.nodes == ("a", "b")
    assert tuple(g1.edges) == ("e1", "e2")
    # two-tuples normalize to an explicit None tag
    assert g1.node_labels["l1"] == ("b", "y", None)


def test_ids_unique_per_sort_but_shared_across_sorts():
    with pytest.raises(EGraphError):
        EGraph(nodes=["a", "a"])
    with pytest.raises(EGraphError):
        EGraph(label_nodes=["x", "x"])
    # the same id can appear in different sorts
    g = EGraph(nodes=["a"], label_nodes=["a"], node_labels={"a": ("a", "a")})
    assert g.has_element("node", "a")
    assert g.has_element("label", "a")
    assert g.has_element("node_label", "a")


def test_reference_validation():
    with pytest.raises(EGraphError):
        EGraph(edges={"e": ("a", "b")})
    with pytest.raises(EGraphError):
        EGraph(nodes=["a"], node_labels={"l": ("a", "x")})
    with pytest.raises(EGraphError):
        EGraph(label_nodes=["x"], node_labels={"l": ("a", "x")})
    with pytest.raises(EGraphError):
        EGraph(nodes=["a"], edge_labels={"l": ("e", "x")})
    with pytest.raises(EGraphError):
        EGraph(nodes=[""])
    with pytest.raises(EGraphError):
        EGraph(nodes=["a"], node_labels={"l": ("a",)})


def test_immutability():
    g = EGraph(nodes=["a"])
    with pytest.raises(AttributeError):
        g.nodes = ()
    with pytest.raises(TypeError):
        g.edges["e"] = ("a", "a")


def test_replace_swaps_components():
    g = EGraph(nodes=["a"], label_nodes=["x"])
    h = g.replace(node_labels={"l": ("a", "x", "val")})
    assert h.node_labels["l"] == ("a", "x", "val")
    assert h.nodes == g.nodes
    # replacing nodes under an existing edge re-validates
    e = EGraph(nodes=["a", "b"], edges={"e": ("a", "b")})
    with pytest.raises(EGraphError):
        e.replace(nodes=("a",))


def test_subgraph_keeps_selected_elements():
    g = EGraph(
        nodes=["a", "b"],
        edges={"e": ("a", "b")},
        label_nodes=["x"],
        node_labels={"l": ("a", "x", "val")},
    )
    h = subgraph(g, {"node": ["a"], "edge": [], "label": ["x"], "node_label": ["l"]})
    assert h.nodes == ("a",)
    assert h.label_nodes == ("x",)
    assert dict(h.node_labels) == {"l": ("a", "x", "val")}
    assert not h.edges
    # sorts not mentioned are kept whole, and the result must not dangle
    assert subgraph(g, {}) == g
    with pytest.raises(EGraphError):
        subgraph(g, {"node": ["a"]})  # keeps edge e whose target is gone


def test_attached_label_nodes():
    g = EGraph(
        nodes=["a"],
        label_nodes=["x", "y"],
        node_labels={"l": ("a", "x", "val")},
    )
    assert g.attached_label_nodes() == frozenset({"x"})


def test_tags_compatible():
    assert tags_compatible(None, "val")
    assert tags_compatible("val", None)
    assert tags_compatible("val", "val")
    assert not tags_compatible("val", "wt")


# ---------------------------------------------------------------------------
# Morphisms

TRIANGLE = EGraph(
    nodes=["a", "b"],
    edges={"e": ("a", "b")},
    label_nodes=["x"],
    node_labels={"l": ("a", "x", "val")},
)


def test_identity_and_inclusion_are_valid():
    ident = identity(TRIANGLE)
    assert ident.errors() == []
    assert ident.image_key() == tuple(
        eid for sort in SORTS for eid in TRIANGLE.ids(sort)
    )
    sub = subgraph(TRIANGLE, {"node": ["a", "b"], "edge": ["e"]})
    inc = inclusion(sub, TRIANGLE)
    assert inc.errors() == []
    assert inc.apply("node", "a") == "a"


def test_morphism_totality_checked():
    partial = EGraphMorphism(source=TRIANGLE, target=TRIANGLE, node_map={"a": "a"})
    assert partial.errors()


def test_morphism_structure_preservation_checked():
    host = EGraph(nodes=["u", "v"], edges={"f": ("u", "v")})
    pattern = EGraph(nodes=["p", "q"], edges={"g": ("p", "q")})
    good = make_morphism(
        pattern, host, {"node": {"p": "u", "q": "v"}, "edge": {"g": "f"}}
    )
    assert good.errors() == []
    flipped = make_morphism(
        pattern, host, {"node": {"p": "v", "q": "u"}, "edge": {"g": "f"}}
    )
    assert flipped.errors()


def test_morphism_tag_compatibility_checked():
    tag_a = EGraph(nodes=["a"], label_nodes=["x"], node_labels={"l": ("a", "x", "val")})
    tag_b = EGraph(nodes=["a"], label_nodes=["x"], node_labels={"l": ("a", "x", "wt")})
    untagged = EGraph(nodes=["a"], label_nodes=["x"], node_labels={"l": ("a", "x")})
    maps = {"node": {"a": "a"}, "label": {"x": "x"}, "node_label": {"l": "l"}}
    assert make_morphism(untagged, tag_a, maps).errors() == []
    assert make_morphism(tag_a, untagged, maps).errors() == []
    assert make_morphism(tag_a, tag_b, maps).errors()


def test_compose_and_commutes():
    sub = EGraph(nodes=["a"])
    mid = EGraph(nodes=["a", "b"])
    top = EGraph(nodes=["a", "b", "c"])
    f = inclusion(sub, mid)
    g = inclusion(mid, top)
    gf = compose(g, f)
    assert gf.source == sub and gf.target == top
    assert gf.apply("node", "a") == "a"
    with pytest.raises(EGraphError):
        compose(f, g)  # not composable in this order


def test_injectivity_specs_describe_allowed_collapsing():
    two = EGraph(nodes=["p", "q"])
    one = EGraph(nodes=["u"])
    collapse = make_morphism(two, one, {"node": {"p": "u", "q": "u"}})
    assert collapse.errors() == []
    assert collapse.satisfies(ANY_SPEC)
    assert not collapse.satisfies(MONO_SPEC)
    assert not collapse.satisfies(ISO_SPEC)
    ident = identity(two)
    assert ident.satisfies(ISO_SPEC)
    into_bigger = inclusion(EGraph(nodes=["p"]), two)
    assert into_bigger.satisfies(MONO_SPEC)
    assert not into_bigger.satisfies(ISO_SPEC)  # not surjective


# ---------------------------------------------------------------------------
# Property tests


@st.composite
def egraphs(draw):
    node_count = draw(st.integers(0, 4))
    nodes = [f"n{i}" for i in range(node_count)]
    label_count = draw(st.integers(0, 3))
    labels = [f"x{i}" for i in range(label_count)]
    edges = {}
    if nodes:
        for i in range(draw(st.integers(0, 4))):
            edges[f"e{i}"] = (
                draw(st.sampled_from(nodes)),
                draw(st.sampled_from(nodes)),
            )
    node_labels = {}
    if nodes and labels:
        for i in range(draw(st.integers(0, 3))):
            node_labels[f"a{i}"] = (
                draw(st.sampled_from(nodes)),
                draw(st.sampled_from(labels)),
                draw(st.sampled_from(["val", "wt", None])),
            )
    edge_labels = {}
    if edges and labels:
        for i in range(draw(st.integers(0, 2))):
            edge_labels[f"w{i}"] = (
                draw(st.sampled_from(sorted(edges))),
                draw(st.sampled_from(labels)),
                draw(st.sampled_from(["val", None])),
            )
    return EGraph(
        nodes=nodes,
        edges=edges,
        label_nodes=labels,
        node_labels=node_labels,
        edge_labels=edge_labels,
    )


@settings(max_examples=100, deadline=None)
@given(egraphs())
def test_identity_morphism_is_always_valid(g):
    ident = identity(g)
    assert ident.errors() == []
    assert ident.satisfies(ISO_SPEC)
    assert compose(ident, ident).same_maps(ident)


@settings(max_examples=100, deadline=None)
@given(egraphs())
def test_construction_is_deterministic(g):
    rebuilt = EGraph(
        nodes=list(reversed(g.nodes)),
        edges=dict(reversed(list(g.edges.items()))),
        label_nodes=list(reversed(g.label_nodes)),
        node_labels=dict(reversed(list(g.node_labels.items()))),
        edge_labels=dict(reversed(list(g.edge_labels.items()))),
    )
    assert rebuilt == g
    assert hash(rebuilt) == hash(g)
