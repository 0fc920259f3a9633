from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neurohotnet import (NodeSet, StructureError, WeightedGraph,
                         connected_components, normalize_symmetric,
                         read_matrix, weighted_degrees, write_matrix)
from neurohotnet.graph import check_symmetric


def bfs_components(adj):
    """Breadth-first search oracle: components of non-isolated nodes."""
    n = adj.shape[0]
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s] or not any(adj[s, j] != 0 for j in range(n) if j != s):
            continue
        seen[s] = True
        queue, comp = deque([s]), []
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in range(n):
                if v != u and adj[u, v] != 0 and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        comps.append(sorted(comp))
    return sorted(comps)


@st.composite
def symmetric_adjacency(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    upper = draw(arrays(np.float64, (n, n), elements=st.sampled_from(
        [0.0, 0.0, 0.0, 0.5, 1.0, 2.0])))
    w = np.triu(upper, 1)
    return w + w.T


def path(n):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return w


# weighted_degrees ---------------------------------------------------------

def test_degrees_of_path():
    g = WeightedGraph.from_matrix(path(3))
    assert weighted_degrees(g).tolist() == [1.0, 2.0, 1.0]


def test_degrees_of_empty_graph():
    g = WeightedGraph.from_matrix(np.zeros((4, 4)))
    assert np.all(weighted_degrees(g) == 0)


def test_toy_hub_degree(toy_graph):
    # the hub region has six unit edges
    assert weighted_degrees(toy_graph)[0] == 6.0


@given(symmetric_adjacency())
def test_degree_sum_is_twice_upper_triangle(w):
    g = WeightedGraph.from_matrix(w)
    assert np.isclose(weighted_degrees(g).sum(), 2 * np.triu(w, 1).sum())


# normalize_symmetric -------------------------------------------------------

def test_regular_graph_normalises_to_inverse_degree():
    # 4-cycle with weight 3: every edge becomes 1/2
    w = 3.0 * np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]])
    m = normalize_symmetric(WeightedGraph.from_matrix(w))
    assert np.allclose(m[w > 0], 0.5, atol=1e-15)


@pytest.mark.parametrize("weight", [1e-3, 1.0, 250.0])
def test_single_edge_normalises_to_one(weight):
    m = normalize_symmetric(WeightedGraph.from_matrix(
        [[0, weight], [weight, 0]]))
    assert np.allclose(m, [[0.0, 1.0], [1.0, 0.0]], atol=0, rtol=4e-16)


def test_isolated_node_row_is_zero():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 2.0
    w[1, 2] = w[2, 1] = 1.0
    m = normalize_symmetric(WeightedGraph.from_matrix(w))
    assert np.all(m[3] == 0) and np.all(m[:, 3] == 0)
    assert np.all(np.isfinite(m))


@given(symmetric_adjacency(), st.floats(1e-3, 1e3))
def test_normalisation_is_scale_invariant(w, c):
    g1 = WeightedGraph.from_matrix(w)
    g2 = WeightedGraph.from_matrix(c * w)
    assert np.allclose(normalize_symmetric(g1), normalize_symmetric(g2),
                       atol=1e-12, rtol=0)


@given(symmetric_adjacency())
def test_normalisation_is_symmetric(w):
    m = normalize_symmetric(WeightedGraph.from_matrix(w))
    assert np.array_equal(m, m.T)


# connected_components -------------------------------------------------------

def test_two_triangles():
    w = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        w[a, b] = w[b, a] = 1
    comps = connected_components(w, 3)
    assert [c.members for c in comps] == [(0, 1, 2), (3, 4, 5)]


def test_pair_is_not_a_component():
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1
    assert connected_components(w, 3) == []


def test_toy_graph_is_connected(toy_graph):
    comps = connected_components(toy_graph.weights, 3)
    assert len(comps) == 1 and len(comps[0]) == 10


def test_asymmetric_adjacency_rejected():
    with pytest.raises(StructureError):
        connected_components(np.array([[0, 1.0], [0, 0]]))


def test_min_size_must_be_positive():
    with pytest.raises(StructureError):
        connected_components(np.zeros((2, 2)), 0)


@given(symmetric_adjacency(), st.integers(1, 4))
def test_components_match_bfs(w, min_size):
    expected = [c for c in bfs_components(w) if len(c) >= min_size]
    got = [list(c.members) for c in connected_components(w, min_size)]
    assert got == expected


@given(symmetric_adjacency())
def test_components_partition_non_isolated_nodes(w):
    comps = connected_components(w, 1)
    members = [m for c in comps for m in c.members]
    assert len(members) == len(set(members))
    non_isolated = {i for i in range(w.shape[0]) if np.any(np.delete(w[i], i))}
    assert set(members) == non_isolated
    label = {m: k for k, c in enumerate(comps) for m in c.members}
    for a, b in zip(*np.nonzero(w)):
        assert label[a] == label[b]
    assert [c.members[0] for c in comps] == sorted(c.members[0] for c in comps)


# types and validation ---------------------------------------------------------

def test_nodeset_sorts_and_rejects_duplicates():
    assert NodeSet((3, 1, 2)).members == (1, 2, 3)
    with pytest.raises(StructureError):
        NodeSet((1, 1))
    with pytest.raises(StructureError):
        NodeSet((-1, 2))


def test_nodeset_symmetric_difference():
    assert NodeSet((0, 1, 2)).symmetric_difference(NodeSet((1, 2, 3))) == 2


def test_nodeset_bounds():
    with pytest.raises(StructureError):
        NodeSet((0, 5)).check_bounds(5)


@pytest.mark.parametrize("w, msg", [
    ([[0, 1], [2, 0]], "symmetric"),
    ([[0, -1], [-1, 0]], "nonnegative"),
    ([[1, 1], [1, 0]], "diagonal"),
    ([[0, np.nan], [np.nan, 0]], "NaN"),
])
def test_invalid_weights_rejected(w, msg):
    with pytest.raises(StructureError, match=msg):
        WeightedGraph.from_matrix(w)


def test_duplicate_labels_rejected():
    with pytest.raises(StructureError, match="distinct"):
        WeightedGraph(["a", "a"], np.zeros((2, 2)))


def test_repair_symmetrises():
    g = WeightedGraph.from_matrix([[0, 1.0], [1.0 + 1e-6, 0]], repair=True)
    assert np.array_equal(g.weights, g.weights.T)


def test_symmetry_tolerance_is_relative():
    big = np.array([[0, 1e6], [1e6 + 1e-4, 0]])
    check_symmetric(big)
    with pytest.raises(StructureError):
        check_symmetric(np.array([[0, 1.0], [1.0 + 1e-6, 0]]))


def test_weights_are_read_only():
    g = WeightedGraph.from_matrix(path(3))
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0


def test_csv_round_trip(tmp_path):
    g = WeightedGraph(["PreCG.L", "PreCG.R", "SFGdor.L"],
                      [[0, 0.1, 2], [0.1, 0, 1 / 3], [2, 1 / 3, 0]])
    g.to_csv(tmp_path / "g.csv")
    h = WeightedGraph.from_csv(tmp_path / "g.csv")
    assert h.labels == g.labels
    assert np.array_equal(h.weights, g.weights)


@pytest.mark.parametrize("body, msg", [
    ("a,b\n0,1\n1\n", "fields"),
    ("a,b\n0,x\n1,0\n", "non-numeric"),
    ("a,b\n0,nan\nnan,0\n", "NaN"),
    ("", "empty"),
])
def test_malformed_matrix_files(tmp_path, body, msg):
    p = tmp_path / "m.csv"
    p.write_text(body)
    with pytest.raises(StructureError, match=msg):
        read_matrix(p)


def test_negative_weights_rejected_on_read(tmp_path):
    p = tmp_path / "m.csv"
    write_matrix(p, ["a", "b"], [[0, -1], [-1, 0]])
    with pytest.raises(StructureError, match="negative"):
        WeightedGraph.from_csv(p)
