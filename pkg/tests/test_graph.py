import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from productgraph.exceptions import InvalidInput
from productgraph.graph import (
    adjoint_on_matrix,
    edge_index,
    export_edge_list,
    is_connected,
    kron_sum,
    laplacian_from_weights,
    load_graph,
    n_edges,
    n_nodes,
    product_weights,
    project_to_laplacian_weights,
    save_graph,
    validate_laplacian,
)

from .conftest import random_connected


def _definition_index(i, j, p):
    # 1-based, i > j
    return i - j + (j - 1) * (2 * p - j) // 2


def test_edge_ordering_matches_closed_form():
    for p in range(2, 9):
        rows, cols = edge_index(p)
        for l, (a, b) in enumerate(zip(rows, cols)):
            assert _definition_index(a + 1, b + 1, p) == l + 1


def test_n_nodes_roundtrip():
    for p in range(1, 30):
        assert n_nodes(n_edges(p)) == p
    with pytest.raises(InvalidInput):
        n_nodes(4)


@pytest.mark.parametrize(
    "w, p, expected",
    [
        ([3], 2, [[3, -3], [-3, 3]]),
        ([1, 1, 1], 3, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]),
        ([1, 0, 2], 3, [[1, -1, 0], [-1, 3, -2], [0, -2, 2]]),
    ],
)
def test_laplacian_examples(w, p, expected):
    np.testing.assert_array_equal(laplacian_from_weights(w, p), expected)


def test_laplacian_length_mismatch():
    with pytest.raises(InvalidInput):
        laplacian_from_weights([1, 2], 3)


def test_laplacian_is_linear(rng):
    a, b = rng.random(10), rng.random(10)
    np.testing.assert_allclose(
        laplacian_from_weights(2 * a - 3 * b), 2 * laplacian_from_weights(a) - 3 * laplacian_from_weights(b)
    )


def test_adjoint_examples():
    np.testing.assert_array_equal(adjoint_on_matrix(np.eye(3)), [2, 2, 2])
    np.testing.assert_array_equal(adjoint_on_matrix([[1, 0], [0, 0]]), [1])
    with pytest.raises(InvalidInput):
        adjoint_on_matrix(np.ones((2, 3)))


def test_adjoint_brute_force(rng):
    p = 5
    Q = rng.normal(size=(p, p))
    out = adjoint_on_matrix(Q)
    for i in range(2, p + 1):
        for j in range(1, i):
            l = _definition_index(i, j, p) - 1
            a, b = i - 1, j - 1
            assert out[l] == pytest.approx(Q[a, a] - Q[a, b] - Q[b, a] + Q[b, b])


def test_adjoint_of_laplacian_on_unit_vectors():
    p = 4
    for l in range(n_edges(p)):
        e = np.zeros(n_edges(p))
        e[l] = 1.0
        L = laplacian_from_weights(e, p)
        got = adjoint_on_matrix(L)
        # each column of L*L by brute force from Definition 2 arithmetic
        rows, cols = edge_index(p)
        ref = [L[i, i] - L[i, j] - L[j, i] + L[j, j] for i, j in zip(cols, rows)]
        np.testing.assert_allclose(got, ref)


@settings(max_examples=50, deadline=None)
@given(p=st.integers(2, 7), seed=st.integers(0, 2**32 - 1))
def test_adjoint_identity(p, seed):
    rng = np.random.default_rng(seed)
    w = rng.random(n_edges(p))
    Q = rng.normal(size=(p, p))
    lhs = np.sum(laplacian_from_weights(w, p) * Q)
    rhs = w @ adjoint_on_matrix(Q)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_product_weights_four_cycle():
    np.testing.assert_array_equal(product_weights([1], [1]), [1, 1, 0, 0, 1, 1])


def test_product_weights_zero_factor_replicates_other(rng):
    w1 = rng.random(3)
    w = product_weights(w1, np.zeros(6), 3, 4)
    L = laplacian_from_weights(w, 12)
    np.testing.assert_allclose(L, np.kron(laplacian_from_weights(w1, 3), np.eye(4)))


@pytest.mark.parametrize("p1, p2", [(2, 3), (3, 4), (5, 2), (1, 4), (4, 1)])
def test_product_weights_equals_dense_kron_sum(rng, p1, p2):
    w1, w2 = rng.random(n_edges(p1)), rng.random(n_edges(p2))
    L1, L2 = laplacian_from_weights(w1, p1), laplacian_from_weights(w2, p2)
    dense = np.kron(L1, np.eye(p2)) + np.kron(np.eye(p1), L2)
    np.testing.assert_allclose(laplacian_from_weights(product_weights(w1, w2, p1, p2), p1 * p2), dense)
    np.testing.assert_allclose(kron_sum(L1, L2), dense)


def test_validate_examples():
    assert validate_laplacian(np.zeros((3, 3)))
    assert validate_laplacian([[1, -1], [-1, 1]])
    assert not validate_laplacian([[1, 1], [1, 1]])
    assert not validate_laplacian([[1, -1], [-1, 2]])
    assert not validate_laplacian([[1, -1, 0], [-1, 1, 0]])


@settings(max_examples=40, deadline=None)
@given(p=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_laplacian_always_valid(p, seed):
    w = np.random.default_rng(seed).uniform(0, 100, n_edges(p))
    assert validate_laplacian(laplacian_from_weights(w, p))


def test_project_examples(rng):
    np.testing.assert_array_equal(project_to_laplacian_weights([[1, -2], [-2, 1]]), [2])
    np.testing.assert_array_equal(project_to_laplacian_weights([[1, 2], [2, 1]]), [0])
    M = rng.normal(size=(6, 6))
    M = M + M.T
    w = project_to_laplacian_weights(M)
    assert np.all(w >= 0)
    assert validate_laplacian(laplacian_from_weights(w, 6))


def test_is_connected():
    assert is_connected([1, 0, 2], 3)
    assert not is_connected([0, 0, 2], 3)
    assert is_connected([], 1)


def test_graph_file_roundtrip(tmp_path, rng):
    w = random_connected(rng, 5)
    save_graph(tmp_path / "g.json", w, 5)
    w2, p = load_graph(tmp_path / "g.json")
    assert p == 5
    np.testing.assert_array_equal(w, w2)
    (tmp_path / "bad.json").write_text(json.dumps({"p": 3, "w": [1, 2]}))
    with pytest.raises(InvalidInput):
        load_graph(tmp_path / "bad.json")


def test_edge_list_export(tmp_path):
    export_edge_list(tmp_path / "e.csv", [1, 0, 2.5], 3)
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "i,j,weight"
    assert lines[1:] == ["2,1,1.0", "3,2,2.5"]
