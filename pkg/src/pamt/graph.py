"""Undirected graphs, GCN-style normalization and label-aware edge noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import SparseAdjacency

UNKNOWN = -1

# achieved noise rate must land this close to the requested one
NOISE_TOLERANCE = 0.01


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph in CSR layout.

    Every edge is stored in both directions, columns are sorted within a
    row and self-loops are never stored.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        indptr = np.array(self.indptr, dtype=np.int64)
        indices = np.array(self.indices, dtype=np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if indptr.shape != (self.n + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise ValueError("malformed row offsets")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("row offsets must be non-decreasing")
        if indices.size and (indices.min() < 0 or indices.max() >= self.n):
            raise ValueError("column index out of range")

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        """Build from an iterable or ``(m, 2)`` array of node pairs.

        Duplicates and reversed duplicates collapse into one undirected edge.
        Self-loops raise ``ValueError``.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"node id out of range for n={n}")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        both = np.concatenate([e, e[:, ::-1]])
        keys = np.unique(both[:, 0] * n + both[:, 1])
        rows, cols = keys // n, keys % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols)

    @property
    def num_edges(self) -> int:
        """Undirected edge count (stored entries / 2)."""
        return self.indices.size // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())

    def edge_list(self) -> np.ndarray:
        """``(m, 2)`` array of undirected edges with ``u < v``, sorted."""
        r = self.rows()
        keep = r < self.indices
        return np.stack([r[keep], self.indices[keep]], axis=1)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.rows(), self.indices] = 1.0
        return a

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


def normalize_adjacency(g: Graph) -> SparseAdjacency:
    """Symmetric normalization ``D^-1/2 (A + I) D^-1/2`` on the graph's pattern plus the diagonal."""
    deg = g.degrees()
    n = g.n
    rows = np.concatenate([g.rows(), np.arange(n)])
    cols = np.concatenate([g.indices, np.arange(n)])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    dt = deg + 1.0
    data = 1.0 / np.sqrt(dt[rows] * dt[cols])
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg + 1, out=indptr[1:])
    return SparseAdjacency(n, indptr, cols, data, symmetric=True)


def _endpoint_labels(g: Graph, labels: np.ndarray):
    labels = np.asarray(labels)
    if labels.shape != (g.n,):
        raise ValueError(f"expected {g.n} labels, got shape {labels.shape}")
    e = g.edge_list()
    lu, lv = labels[e[:, 0]], labels[e[:, 1]]
    if np.any(lu == UNKNOWN) or np.any(lv == UNKNOWN):
        raise ValueError("edge endpoint with unknown label")
    return e, lu != lv


def structure_noise_rate(g: Graph, labels) -> float:
    """Fraction of undirected edges whose endpoints carry different labels."""
    if g.num_edges == 0:
        raise ValueError("empty graph")
    _, cross = _endpoint_labels(g, labels)
    return float(cross.sum()) / g.num_edges


def inject_structure_noise(g: Graph, labels, target_rate: float, rng_seed: int) -> Graph:
    """Raise the structure noise rate of ``g`` to ``target_rate``.

    Same-label edges are removed and absent cross-label pairs are added one
    for one, so the node set and the edge count are unchanged. Both samples
    are uniform without replacement and fully determined by ``rng_seed``.
    """
    if not 0.0 <= target_rate <= 1.0:
        raise ValueError(f"target rate {target_rate} outside [0, 1]")
    labels = np.asarray(labels)
    if np.any(labels == UNKNOWN):
        raise ValueError("noise injection needs every node labelled")
    edges, cross = _endpoint_labels(g, labels)
    m = len(edges)
    if m == 0:
        raise ValueError("empty graph")
    n_cross = int(cross.sum())
    current = n_cross / m
    if target_rate < current - 1e-12:
        raise ValueError(f"cannot denoise: target {target_rate} is below current rate {current:.4f}")
    swaps = int(round(target_rate * m)) - n_cross
    if swaps <= 0:
        return g
    if abs((n_cross + swaps) / m - target_rate) > NOISE_TOLERANCE:
        raise ValueError(f"target unreachable: {m} edges cannot realize rate {target_rate}")

    same_ids = np.flatnonzero(~cross)
    counts = np.bincount(labels, minlength=int(labels.max()) + 1)
    cross_pairs = (g.n * (g.n - 1) // 2) - int((counts * (counts - 1) // 2).sum())
    if swaps > same_ids.size or swaps > cross_pairs - n_cross:
        raise ValueError(
            f"target unreachable: need {swaps} swaps, have {same_ids.size} same-label edges "
            f"and {cross_pairs - n_cross} free cross-label pairs"
        )

    rng = np.random.default_rng(rng_seed)
    removed = rng.choice(same_ids, size=swaps, replace=False)
    keep = np.ones(m, dtype=bool)
    keep[removed] = False

    n = g.n
    taken = set((edges[:, 0] * n + edges[:, 1]).tolist())
    added: list[int] = []
    # rejection sampling over ordered pairs is uniform over the eligible unordered pairs
    while len(added) < swaps:
        batch = rng.integers(0, n, size=(2 * (swaps - len(added)) + 16, 2))
        for u, v in batch.tolist():
            if u == v or labels[u] == labels[v]:
                continue
            key = min(u, v) * n + max(u, v)
            if key in taken:
                continue
            taken.add(key)
            added.append(key)
            if len(added) == swaps:
                break
    new = np.array(added, dtype=np.int64)
    out = np.concatenate([edges[keep], np.stack([new // n, new % n], axis=1)])
    return Graph.from_edges(n, out)
