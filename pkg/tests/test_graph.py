import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sabotagegames import (
    Graph,
    GraphFormatError,
    has_path,
    out_edges,
    parse_graph,
    serialize_graph,
)

from .oracles import path_exists

TRIANGLE_DOC = '{"vertices":["0","1","2"],"edges":[["0","1"],["0","2"],["1","2"]],"start":"0"}'
RELAY_DOC = (
    '{"vertices":["s","u","v","w","t"],'
    '"edges":[["s","u"],["s","w"],["u","v"],["v","u"],["v","w"],["w","v"],'
    '["u","t"],["v","t"],["w","t"]],"start":"s","goal":"t"}'
)


def test_parse_triangle():
    g = parse_graph(TRIANGLE_DOC)
    assert g.vertices == ("0", "1", "2")
    assert len(g.edges) == 3
    assert g.start == "0" and g.goal is None


def test_parse_relay_nine_edges():
    g = parse_graph(RELAY_DOC)
    assert len(g.edges) == 9
    assert g.goal == "t"


def test_round_trip_is_byte_identical():
    for doc in (TRIANGLE_DOC, RELAY_DOC):
        assert serialize_graph(parse_graph(doc)) == doc


def test_serializer_key_order():
    doc = json.loads(serialize_graph(parse_graph(RELAY_DOC)))
    assert list(doc) == ["vertices", "edges", "start", "goal"]


def test_empty_edges_rejected():
    with pytest.raises(GraphFormatError, match="empty edge set"):
        parse_graph('{"vertices":["a"],"edges":[],"start":"a"}')


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ('{"vertices":["a","a"],"edges":[["a","a"]],"start":"a"}', "duplicate vertex 'a'"),
        (
            '{"vertices":["a","b"],"edges":[["a","b"],["a","b"]],"start":"a"}',
            "duplicate edge",
        ),
        ('{"vertices":["a"],"edges":[["a","b"]],"start":"a"}', "unknown endpoint 'b'"),
        ('{"vertices":["a"],"edges":[["a","a"]],"start":"c"}', "unknown start vertex 'c'"),
        ('{"edges":[["a","a"]],"start":"a"}', "missing 'vertices'"),
    ],
)
def test_parse_errors_name_the_offender(doc, fragment):
    with pytest.raises(GraphFormatError, match=fragment):
        parse_graph(doc)


def test_self_loops_admitted():
    g = parse_graph('{"vertices":["a"],"edges":[["a","a"]],"start":"a"}')
    assert ("a", "a") in g.full_edges()


def test_vertex_named_g_is_just_a_name():
    g = parse_graph('{"vertices":["g","h"],"edges":[["g","h"]],"start":"g","goal":"h"}')
    assert g.goal == "h"


def test_out_edges_triangle(triangle):
    full = triangle.full_edges()
    assert set(out_edges(full, "0")) == {("0", "1"), ("0", "2")}
    assert set(out_edges(triangle.edge_set([("1", "2")]), "2")) == set()


def test_out_edges_relay(relay):
    assert set(out_edges(relay.full_edges(), "v")) == {("v", "u"), ("v", "w"), ("v", "t")}


def test_out_edges_unknown_vertex(triangle):
    with pytest.raises(GraphFormatError, match="unknown vertex"):
        out_edges(triangle.full_edges(), "9")


def test_has_path_directedness(triangle):
    sub = triangle.edge_set([("1", "2")])
    assert has_path(sub, "1", "2")
    assert not has_path(sub, "2", "1")


def test_has_path_relay(relay):
    assert has_path(relay.full_edges(), "s", "t")
    pruned = relay.full_edges()
    for e in (("s", "u"), ("u", "v"), ("u", "t")):
        pruned = pruned.remove(e)
    assert not has_path(pruned, "u", "t")


def test_has_path_reflexive(relay):
    empty = relay.edge_set([])
    for v in relay.vertices:
        assert has_path(empty, v, v)


@st.composite
def graph_and_subsets(draw):
    n = draw(st.integers(1, 3))
    names = tuple(str(i) for i in range(n))
    pairs = [(u, v) for u in names for v in names]
    edges = tuple(draw(st.sets(st.sampled_from(pairs), min_size=1, max_size=4)))
    g = Graph(names, edges, names[0])
    small = draw(st.sets(st.sampled_from(list(edges))))
    big = small | draw(st.sets(st.sampled_from(list(edges))))
    return g, g.edge_set(small), g.edge_set(big)


@settings(max_examples=80, deadline=None)
@given(graph_and_subsets())
def test_has_path_monotone(data):
    g, small, big = data
    for frm in g.vertices:
        for to in g.vertices:
            if has_path(small, frm, to):
                assert has_path(big, frm, to)


@settings(max_examples=80, deadline=None)
@given(graph_and_subsets())
def test_out_edges_subset_and_matches_oracle(data):
    g, small, _ = data
    for v in g.vertices:
        sourced = out_edges(small, v)
        assert all(e in small for e in sourced)
        assert set(sourced) == {e for e in small if e[0] == v}
        for to in g.vertices:
            assert has_path(small, v, to) == path_exists(list(small), v, to)
