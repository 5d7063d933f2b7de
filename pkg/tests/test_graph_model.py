"""Snapshot/TemporalGraph invariants, edge-list parsing, unions, windows."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmpfp import (
    IngestionError,
    Snapshot,
    TemporalGraph,
    ValidationError,
    induced_subgraph,
    parse_temporal_edge_list,
    render_temporal_edge_list,
    restrict_to_nodes,
    top_active_nodes,
    union_graph,
    window,
)
from tmpfp.graph_model import EdgeListSchema, edge_key

from helpers import random_temporal_graph, snap, tgraph


def test_edge_key_canonical_order():
    assert edge_key("b", "a") == ("a", "b")
    assert edge_key("a", "b") == ("a", "b")
    with pytest.raises(ValidationError):
        edge_key("a", "a")


def test_snapshot_rejects_non_canonical_edges():
    with pytest.raises(ValidationError):
        Snapshot(1, frozenset("ab"), frozenset([("b", "a")]), {("b", "a"): 1.0})


def test_snapshot_rejects_dangling_endpoint():
    with pytest.raises(ValidationError):
        Snapshot(1, frozenset("a"), frozenset([("a", "b")]), {("a", "b"): 1.0})


def test_snapshot_rejects_weight_key_mismatch():
    with pytest.raises(ValidationError):
        Snapshot(1, frozenset("ab"), frozenset([("a", "b")]), {})


def test_snapshot_rejects_non_positive_weight():
    with pytest.raises(ValidationError):
        snap(1, [("a", "b", 0.0)])
    with pytest.raises(ValidationError):
        snap(1, [("a", "b", -2.0)])


def test_snapshot_build_aggregates_parallel_edges():
    g = snap(1, [("a", "b", 2.0), ("b", "a", 3.0)])
    assert g.weights[("a", "b")] == 5.0
    assert g.weight("b", "a") == 5.0
    assert g.weight("a", "c") == 0.0


def test_temporal_graph_needs_contiguous_timestamps():
    with pytest.raises(ValidationError):
        TemporalGraph((snap(1), snap(3)))
    with pytest.raises(ValidationError):
        TemporalGraph(())
    assert tgraph([("a", "b", 1.0)], [("b", "c", 1.0)]).T == 2


def test_parse_aggregates_and_reindexes():
    text = "time,source,target,weight\n10,a,b,2.0\n10,a,b,3.0\n20,b,c,1.0\n"
    tg = parse_temporal_edge_list(text)
    assert tg.T == 2
    assert tg.snapshot(1).weights == {("a", "b"): 5.0}
    assert tg.snapshot(2).weights == {("b", "c"): 1.0}
    assert tg.snapshot(1).timestamp == 1 and tg.snapshot(2).timestamp == 2


def test_parse_missing_weight_column_defaults_to_one():
    tg = parse_temporal_edge_list("time,source,target\n1,a,b\n")
    assert tg.T == 1
    assert tg.snapshot(1).weights == {("a", "b"): 1.0}


def test_parse_arity_error_carries_line_number():
    with pytest.raises(IngestionError) as err:
        parse_temporal_edge_list("time,source,target\n1,a\n")
    assert err.value.line == 2
    assert "2" in str(err.value)


def test_parse_skips_comments_and_blank_lines():
    text = "# header next\ntime,source,target,weight\n\n# mid comment\n1,a,b,1.5\n"
    tg = parse_temporal_edge_list(text)
    assert tg.snapshot(1).weights == {("a", "b"): 1.5}


def test_parse_error_cases():
    with pytest.raises(ValidationError, match="empty input"):
        parse_temporal_edge_list("")
    with pytest.raises(ValidationError, match="empty input"):
        parse_temporal_edge_list("time,source,target\n")
    with pytest.raises(IngestionError, match="non-numeric time"):
        parse_temporal_edge_list("time,source,target\nx,a,b\n")
    with pytest.raises(IngestionError, match="self-loop"):
        parse_temporal_edge_list("time,source,target\n1,a,a\n")
    with pytest.raises(IngestionError, match="empty node label"):
        parse_temporal_edge_list("time,source,target\n1,,b\n")
    with pytest.raises(ValidationError, match="negative weight"):
        parse_temporal_edge_list("time,source,target,weight\n1,a,b,-1\n")
    with pytest.raises(ValidationError, match="zero weight"):
        parse_temporal_edge_list("time,source,target,weight\n1,a,b,0\n")
    with pytest.raises(ValidationError, match="missing required column"):
        parse_temporal_edge_list("t,source,target\n1,a,b\n")


def test_parse_custom_schema_and_required_weight():
    schema = EdgeListSchema(time="day", source="u", target="v", weight="w")
    tg = parse_temporal_edge_list("day,u,v,w\n1,a,b,2\n", schema)
    assert tg.snapshot(1).weights == {("a", "b"): 2.0}
    strict = EdgeListSchema(weight_required=True)
    with pytest.raises(ValidationError, match="weight"):
        parse_temporal_edge_list("time,source,target\n1,a,b\n", strict)


def test_union_graph_examples():
    path = union_graph(snap(1, [("a", "b", 1.0)]), snap(2, [("b", "c", 1.0)]))
    assert path.nodes == frozenset("abc")
    assert path.edges == frozenset([("a", "b"), ("b", "c")])
    g = snap(1, [("a", "b", 1.0)])
    assert union_graph(g, g) == g
    disjoint = union_graph(snap(1, [("a", "b", 1.0)]), snap(2, [("c", "d", 1.0)]))
    assert disjoint.nodes == frozenset("abcd") and len(disjoint.edges) == 2


def test_union_graph_takes_max_weight_on_shared_edges():
    g = union_graph(snap(1, [("a", "b", 1.0)]), snap(2, [("a", "b", 3.0)]))
    assert g.weights[("a", "b")] == 3.0


def test_union_graph_commutative_associative_idempotent():
    rng = np.random.default_rng(5)
    for _ in range(25):
        a, b, c = (random_temporal_graph(rng, 6, 1).snapshot(1) for _ in range(3))
        ab, ba = union_graph(a, b), union_graph(b, a)
        assert (ab.nodes, ab.edges, ab.weights) == (ba.nodes, ba.edges, ba.weights)
        left = union_graph(union_graph(a, b), c)
        right = union_graph(a, union_graph(b, c))
        assert (left.nodes, left.edges, left.weights) == (right.nodes, right.edges, right.weights)
        aa = union_graph(a, a)
        assert (aa.nodes, aa.edges, aa.weights) == (a.nodes, a.edges, a.weights)


def test_induced_subgraph_examples():
    tri = snap(1, [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    sub = induced_subgraph(tri, {"a", "b"})
    assert sub.edges == frozenset([("a", "b")])
    assert induced_subgraph(tri, tri.nodes) == tri
    assert induced_subgraph(tri, set()).nodes == frozenset()
    # labels absent from g are ignored
    assert induced_subgraph(tri, {"a", "z"}).nodes == frozenset("a")


def test_induced_subgraph_composes_through_intersection():
    rng = np.random.default_rng(11)
    for _ in range(25):
        g = random_temporal_graph(rng, 7, 1).snapshot(1)
        labels = list("abcdefg")
        a = {v for v in labels if rng.random() < 0.6}
        b = {v for v in labels if rng.random() < 0.6}
        assert induced_subgraph(g, a & b) == induced_subgraph(induced_subgraph(g, a), b)


def test_window_arithmetic():
    tg = tgraph(*[[("a", "b", float(t))] for t in range(1, 6)])
    wins = window(tg, 3, 1)
    assert len(wins) == 3
    for w in wins:
        assert w.T == 3 and [g.timestamp for g in w.snapshots] == [1, 2, 3]
    assert wins[1].snapshot(1).weights == {("a", "b"): 2.0}
    assert window(tg, 5, 1) == [tg]
    tg4 = tgraph(*[[("a", "b", float(t))] for t in range(1, 5)])
    wins2 = window(tg4, 2, 2)
    assert [w.snapshot(1).weights[("a", "b")] for w in wins2] == [1.0, 3.0]


def test_window_validation():
    tg = tgraph([("a", "b", 1.0)], [("a", "b", 1.0)])
    with pytest.raises(ValidationError):
        window(tg, 3, 1)
    with pytest.raises(ValidationError):
        window(tg, 0, 1)
    with pytest.raises(ValidationError):
        window(tg, 2, 0)


def test_top_active_nodes_ranks_by_total_incident_weight():
    tg = tgraph(
        [("a", "b", 9.0), ("c", "d", 1.0)],
        [("a", "b", 9.0), ("c", "e", 1.0)],
    )
    assert top_active_nodes(tg, 2) == ["a", "b"]
    # ties break by label
    assert top_active_nodes(tg, 4) == ["a", "b", "c", "d"]
    with pytest.raises(ValidationError):
        top_active_nodes(tg, 0)


def test_restrict_to_nodes_keeps_timestamps():
    tg = tgraph([("a", "b", 1.0), ("c", "d", 1.0)], [("a", "c", 1.0)])
    out = restrict_to_nodes(tg, {"a", "b"})
    assert out.T == 2
    assert out.snapshot(1).edges == frozenset([("a", "b")])
    assert out.snapshot(2).nodes == frozenset("a")


@st.composite
def edge_list_graphs(draw):
    """Graphs in the parser's image: every node covered by an edge."""
    T = draw(st.integers(1, 3))
    snaps = []
    for t in range(1, T + 1):
        n_edges = draw(st.integers(1, 5))
        edges = []
        for i in range(n_edges):
            u = draw(st.sampled_from("abcdef"))
            v = draw(st.sampled_from("abcdef").filter(lambda x: x != u))
            w = draw(st.floats(0.1, 10.0, allow_nan=False))
            edges.append((u, v, w))
        snaps.append(snap(t, edges))
    return TemporalGraph(tuple(snaps))


@settings(max_examples=60, deadline=None)
@given(edge_list_graphs())
def test_parse_render_round_trip_is_identity(tg):
    back = parse_temporal_edge_list(render_temporal_edge_list(tg))
    assert back == tg
    # snapshot equality ignores weights, so check them separately
    for a, b in zip(tg.snapshots, back.snapshots):
        assert a.weights == b.weights


def test_render_quotes_awkward_labels():
    tg = parse_temporal_edge_list('time,source,target,weight\n1,"x,1",y,1.5\n')
    back = parse_temporal_edge_list(render_temporal_edge_list(tg))
    assert back == tg and back.snapshot(1).weights == tg.snapshot(1).weights


def test_render_rejects_unrepresentable_graphs():
    with pytest.raises(ValidationError, match="isolated"):
        render_temporal_edge_list(tgraph([("a", "b", 1.0)], nodes="c"))
    with pytest.raises(ValidationError, match="without edges"):
        render_temporal_edge_list(TemporalGraph((snap(1, [], "ab"),)))
