"""Sparse kernels over a fixed CSR edge pattern.

Everything the propagation code needs reduces to three operations on a
CSR matrix whose sparsity pattern never changes: multiplying it with a
dense block, filling its pattern with row dot products of a dense matrix,
and multiplying two matrices that share the pattern entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse as sp


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.flags.writeable:
        a = a.copy()
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseAdjacency:
    """Square CSR matrix with real weights.

    Column indices are sorted within each row, which fixes the accumulation
    order of every kernel in this module.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indptr", _frozen(self.indptr, np.int64))
        object.__setattr__(self, "indices", _frozen(self.indices, np.int64))
        object.__setattr__(self, "data", _frozen(self.data, np.float64))
        if self.indptr.shape != (self.n + 1,):
            raise ValueError(f"indptr has length {self.indptr.size}, expected {self.n + 1}")
        if self.indices.shape != self.data.shape:
            raise ValueError("indices and data differ in length")
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise ValueError("indptr does not span the stored entries")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be non-decreasing")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite weight")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def rows(self) -> np.ndarray:
        """Row index of every stored entry (COO view of ``indptr``)."""
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))

    def with_data(self, data: np.ndarray) -> SparseAdjacency:
        return SparseAdjacency(self.n, self.indptr, self.indices, data, self.symmetric)

    def same_pattern(self, other: SparseAdjacency) -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def to_scipy(self) -> sp.csr_matrix:
        m = sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))
        m.has_sorted_indices = True
        return m

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[self.rows(), self.indices] = self.data
        return out

    @classmethod
    def from_scipy(cls, m, symmetric: bool = False) -> SparseAdjacency:
        m = sp.csr_matrix(m, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix is not square: {m.shape}")
        return cls(m.shape[0], m.indptr, m.indices, m.data, symmetric)


def spmm(a: SparseAdjacency, m: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``a @ m``.

    Each output row is accumulated left to right over ascending column
    index, so repeated calls give bit-identical results.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != a.n:
        raise ValueError(f"dimension mismatch: matrix is {a.n}x{a.n}, operand has shape {m.shape}")
    return np.asarray(a.to_scipy() @ m)


def gram_on_pattern(pattern: SparseAdjacency, h: np.ndarray) -> SparseAdjacency:
    """Entries of ``h @ h.T`` restricted to ``pattern``.

    Only the stored positions are evaluated, so the cost is
    ``O(nnz * h.shape[1])`` rather than ``O(n^2 * h.shape[1])``.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != pattern.n:
        raise ValueError(f"dimension mismatch: pattern has {pattern.n} rows, h has shape {h.shape}")
    vals = np.einsum("ij,ij->i", h[pattern.rows()], h[pattern.indices])
    return pattern.with_data(vals)


def hadamard(a: SparseAdjacency, b: SparseAdjacency) -> SparseAdjacency:
    """Entrywise product of two matrices stored on the same pattern."""
    if not a.same_pattern(b):
        raise ValueError("pattern mismatch")
    return SparseAdjacency(a.n, a.indptr, a.indices, a.data * b.data, a.symmetric and b.symmetric)
