import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse as sp

from pamt.graph import Graph, normalize_adjacency
from pamt.sparse import SparseAdjacency, gram_on_pattern, hadamard, spmm
from pamt.synthetic import random_graph


def random_sparse(n, density, rng, symmetric=False):
    m = sp.random(n, n, density=density, random_state=np.random.RandomState(rng.integers(2**31)))
    if symmetric:
        m = m + m.T
    return SparseAdjacency.from_scipy(m, symmetric=symmetric)


def test_identity_spmm(rng):
    eye = SparseAdjacency.from_scipy(sp.eye(6))
    m = rng.normal(size=(6, 3))
    np.testing.assert_array_equal(spmm(eye, m), m)


def test_path_spmm():
    a = normalize_adjacency(Graph.from_edges(2, [(0, 1)]))
    np.testing.assert_array_equal(spmm(a, np.eye(2)), [[0.5, 0.5], [0.5, 0.5]])


def test_spmm_matches_dense_product(rng):
    a = random_sparse(30, 0.15, rng)
    m = rng.normal(size=(30, 5))
    np.testing.assert_allclose(spmm(a, m), a.to_dense() @ m, rtol=0, atol=1e-12)


def test_spmm_dimension_mismatch(rng):
    with pytest.raises(ValueError, match="dimension mismatch"):
        spmm(random_sparse(5, 0.5, rng), np.ones((4, 2)))


def test_spmm_is_deterministic(rng):
    a = random_sparse(40, 0.2, rng)
    m = rng.normal(size=(40, 7))
    assert spmm(a, m).tobytes() == spmm(a, m).tobytes()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s1=st.floats(-3, 3), s2=st.floats(-3, 3))
def test_spmm_linearity(seed, s1, s2):
    rng = np.random.default_rng(seed)
    a = random_sparse(15, 0.3, rng)
    m1, m2 = rng.normal(size=(2, 15, 4))
    np.testing.assert_allclose(spmm(a, s1 * m1 + s2 * m2), s1 * spmm(a, m1) + s2 * spmm(a, m2), atol=1e-10)


def test_gram_equal_unit_rows():
    pattern = normalize_adjacency(random_graph(10, 0.4, 1))
    h = np.tile([0.0, 1.0, 0.0], (10, 1))
    np.testing.assert_array_equal(gram_on_pattern(pattern, h).data, 1.0)


def test_gram_orthogonal_rows():
    pattern = normalize_adjacency(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)]))
    g = gram_on_pattern(pattern, np.eye(3)).to_dense()
    np.testing.assert_array_equal(g, np.eye(3))


def test_gram_matches_masked_dense_gram(rng):
    pattern = normalize_adjacency(random_graph(20, 0.25, rng))
    h = rng.normal(size=(20, 4))
    support = pattern.to_dense() != 0
    expected = np.where(support, h @ h.T, 0.0)
    np.testing.assert_allclose(gram_on_pattern(pattern, h).to_dense(), expected, rtol=0, atol=1e-12)


def test_gram_symmetric_on_symmetric_pattern(rng):
    pattern = normalize_adjacency(random_graph(25, 0.3, rng))
    g = gram_on_pattern(pattern, rng.random((25, 6))).to_dense()
    np.testing.assert_array_equal(g, g.T)


def test_gram_dimension_mismatch(rng):
    with pytest.raises(ValueError, match="dimension mismatch"):
        gram_on_pattern(normalize_adjacency(random_graph(5, 0.5, rng)), np.ones((4, 2)))


def test_hadamard_identity_and_zero(rng):
    a = normalize_adjacency(random_graph(12, 0.3, rng))
    ones = a.with_data(np.ones(a.nnz))
    zeros = a.with_data(np.zeros(a.nnz))
    np.testing.assert_array_equal(hadamard(a, ones).data, a.data)
    np.testing.assert_array_equal(hadamard(a, zeros).to_dense(), 0.0)


def test_hadamard_matches_dense(rng):
    a = normalize_adjacency(random_graph(15, 0.3, rng))
    b = a.with_data(rng.normal(size=a.nnz))
    np.testing.assert_array_equal(hadamard(a, b).to_dense(), a.to_dense() * b.to_dense())


def test_hadamard_pattern_mismatch(rng):
    a = normalize_adjacency(Graph.from_edges(3, [(0, 1)]))
    b = normalize_adjacency(Graph.from_edges(3, [(1, 2)]))
    with pytest.raises(ValueError, match="pattern mismatch"):
        hadamard(a, b)


def test_hadamard_of_symmetric_is_symmetric(rng):
    a = normalize_adjacency(random_graph(15, 0.3, rng))
    b = gram_on_pattern(a, rng.random((15, 3)))
    d = hadamard(a, b).to_dense()
    np.testing.assert_array_equal(d, d.T)


def test_sparse_rejects_bad_input():
    with pytest.raises(ValueError):
        SparseAdjacency(2, [0, 1, 1], [5], [1.0])
    with pytest.raises(ValueError, match="non-finite"):
        SparseAdjacency(1, [0, 1], [0], [np.nan])
