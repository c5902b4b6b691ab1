from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_ppr_polynomial, exact_ppr_polynomial
from pamt.graph import Graph, normalize_adjacency
from pamt.propagation import (
    PropagationConfig,
    build_propagation_matrix,
    build_similarity_mask,
    label_matrix,
    node_representation,
    propagate,
    propagate_labels,
)
from pamt.nn import init_params, softmax
from pamt.synthetic import random_graph


def softmax_rows(rng, n, c, scale=2.0):
    return softmax(rng.normal(scale=scale, size=(n, c)))


def test_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(alpha=1.5, K=3)
    with pytest.raises(ValueError):
        PropagationConfig(alpha=0.1, K=0)


def test_mask_trivial_cases():
    adj = normalize_adjacency(Graph.from_edges(2, [(0, 1)]))
    same = build_similarity_mask(np.array([[0.0, 1.0], [0.0, 1.0]]), adj)
    np.testing.assert_array_equal(same.data, 1.0)
    diff = build_similarity_mask(np.eye(2), adj).to_dense()
    assert diff[0, 1] == 0.0 and diff[1, 0] == 0.0
    uniform = build_similarity_mask(np.full((2, 4), 0.25), adj)
    np.testing.assert_array_equal(uniform.data, 0.25)


def test_mask_includes_diagonal_as_squared_norm(rng):
    adj = normalize_adjacency(random_graph(10, 0.3, rng))
    h = softmax_rows(rng, 10, 3)
    np.testing.assert_allclose(np.diag(build_similarity_mask(h, adj).to_dense()), (h * h).sum(axis=1), atol=1e-15)


def test_propagation_matrix_trivial_masks(rng):
    adj = normalize_adjacency(random_graph(12, 0.3, rng))
    ones = adj.with_data(np.ones(adj.nnz))
    np.testing.assert_array_equal(build_propagation_matrix(adj, ones).data, adj.data)
    zeros = adj.with_data(np.zeros(adj.nnz))
    a_p = build_propagation_matrix(adj, zeros)
    y = label_matrix(np.arange(12) % 3, np.array([0, 4, 8]), 3)
    cfg = PropagationConfig(0.2, 5)
    # with A_p = 0 only the restart term survives
    np.testing.assert_allclose(propagate_labels(a_p, y, cfg), 0.2 * y, atol=1e-15)


def test_propagation_matrix_matches_dense_hadamard(rng):
    adj = normalize_adjacency(random_graph(15, 0.3, rng))
    mask = build_similarity_mask(softmax_rows(rng, 15, 4), adj)
    np.testing.assert_array_equal(build_propagation_matrix(adj, mask).to_dense(), adj.to_dense() * mask.to_dense())


def test_renormalized_mask_is_row_stochastic(rng):
    adj = normalize_adjacency(random_graph(15, 0.3, rng))
    mask = build_similarity_mask(softmax_rows(rng, 15, 4), adj)
    a_p = build_propagation_matrix(adj, mask, renormalize=True)
    np.testing.assert_allclose(a_p.to_dense().sum(axis=1), 1.0, atol=1e-12)


def test_alpha_one_is_identity(rng):
    adj = normalize_adjacency(random_graph(10, 0.4, rng))
    m = rng.normal(size=(10, 3))
    np.testing.assert_array_equal(propagate(adj, m, PropagationConfig(1.0, 7)), m)


def test_alpha_zero_single_step_is_spmm(rng):
    adj = normalize_adjacency(random_graph(10, 0.4, rng))
    m = rng.normal(size=(10, 3))
    np.testing.assert_allclose(propagate(adj, m, PropagationConfig(0.0, 1)), adj.to_dense() @ m, atol=1e-14)


def test_matches_dense_polynomial(rng):
    adj = normalize_adjacency(random_graph(20, 0.2, rng))
    m = rng.normal(size=(20, 4))
    expected = dense_ppr_polynomial(adj.to_dense(), 0.1, 10) @ m
    np.testing.assert_allclose(propagate(adj, m, PropagationConfig(0.1, 10)), expected, rtol=0, atol=1e-10)


def test_triangle_matches_exact_rational_polynomial():
    # on a triangle every normalized weight is exactly 1/3
    adj = normalize_adjacency(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)]))
    third = [[Fraction(1, 3)] * 3 for _ in range(3)]
    exact = exact_ppr_polynomial(third, Fraction(1, 10), 10)
    y = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    got = propagate_labels(adj, y, PropagationConfig(0.1, 10))
    expected = np.array([[float(exact[i][0]), float(exact[i][2])] for i in range(3)])
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)
    # node 0 keeps 0.1 + 0.9^10/3 + (1 - 0.1 - 0.9^10)/3 of its own label: (1 + 2*0.1) / 3 ... check one closed form
    assert got[0, 0] == pytest.approx(1 / 3 + (2 / 3) * 0.1, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 50),
    p=st.floats(0.05, 0.5),
    alpha=st.sampled_from([0.0, 0.1, 0.5, 1.0]),
    K=st.sampled_from([1, 5, 10]),
    seed=st.integers(0, 2**32 - 1),
)
def test_iterative_equals_polynomial_with_masks(n, p, alpha, K, seed):
    rng = np.random.default_rng(seed)
    adj = normalize_adjacency(random_graph(n, p, rng))
    a_p = build_propagation_matrix(adj, build_similarity_mask(softmax_rows(rng, n, 3), adj))
    m = rng.random((n, 3))
    expected = dense_ppr_polynomial(a_p.to_dense(), alpha, K) @ m
    assert np.max(np.abs(propagate(a_p, m, PropagationConfig(alpha, K)) - expected)) <= 1e-10


def test_no_labels_gives_zero(rng):
    adj = normalize_adjacency(random_graph(8, 0.4, rng))
    np.testing.assert_array_equal(propagate_labels(adj, np.zeros((8, 2)), PropagationConfig(0.1, 10)), 0.0)


def test_alpha_one_keeps_observed_labels(rng):
    adj = normalize_adjacency(random_graph(8, 0.4, rng))
    y = label_matrix(np.arange(8) % 2, np.array([1, 2]), 2)
    np.testing.assert_array_equal(propagate_labels(adj, y, PropagationConfig(1.0, 10)), y)


def test_negative_labels_rejected(rng):
    adj = normalize_adjacency(random_graph(4, 0.5, rng))
    with pytest.raises(ValueError, match="negative"):
        propagate_labels(adj, -np.ones((4, 2)), PropagationConfig())


def test_six_node_toy():
    # two triangles joined by one cross edge; one labelled node per class
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    labels = np.array([0, 0, 0, 1, 1, 1])
    adj = normalize_adjacency(g)
    y = label_matrix(labels, np.array([0, 5]), 2)
    cfg = PropagationConfig(0.1, 10)
    got = propagate_labels(adj, y, cfg)
    np.testing.assert_allclose(got, dense_ppr_polynomial(adj.to_dense(), 0.1, 10) @ y, atol=1e-12)
    assert got[0, 0] >= 0.1 and got[5, 1] >= 0.1
    assert np.all(got >= 0) and np.all(got <= 1)
    assert np.all(np.argmax(got, axis=1) == labels)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 40), seed=st.integers(0, 2**32 - 1))
def test_masked_soft_labels_never_exceed_unmasked(n, seed):
    rng = np.random.default_rng(seed)
    adj = normalize_adjacency(random_graph(n, 0.3, rng))
    a_p = build_propagation_matrix(adj, build_similarity_mask(softmax_rows(rng, n, 3), adj))
    y = label_matrix(rng.integers(0, 3, n), rng.choice(n, size=max(1, n // 4), replace=False), 3)
    cfg = PropagationConfig(0.1, 10)
    masked, plain = propagate_labels(a_p, y, cfg), propagate_labels(adj, y, cfg)
    assert np.all(masked <= plain + 1e-15)
    assert np.all(masked >= 0) and np.all(plain <= 1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(3, 30), seed=st.integers(0, 2**32 - 1))
def test_label_linearity_and_symmetry(n, seed):
    rng = np.random.default_rng(seed)
    adj = normalize_adjacency(random_graph(n, 0.3, rng))
    a_p = build_propagation_matrix(adj, build_similarity_mask(softmax_rows(rng, n, 3), adj))
    cfg = PropagationConfig(0.15, 10)
    y1, y2 = rng.random((2, n, 3))
    lhs = propagate_labels(a_p, y1 + y2, cfg)
    np.testing.assert_allclose(lhs, propagate_labels(a_p, y1, cfg) + propagate_labels(a_p, y2, cfg), atol=1e-10)
    full = propagate(a_p, np.eye(n), cfg)
    np.testing.assert_allclose(full, full.T, atol=1e-12)


def test_node_representation_sources(rng):
    x = rng.normal(size=(6, 4))
    p = init_params(4, 5, 3, rng)
    h = node_representation(p, x, "softmax")
    np.testing.assert_allclose(h.sum(axis=1), 1.0, atol=1e-15)
    assert node_representation(p, x, "logits").shape == (6, 3)
    with pytest.raises(ValueError, match="unknown mask source"):
        node_representation(p, x, "hidden")
