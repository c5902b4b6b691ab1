"""Small attributed graphs with planted classes, for tests and smoke runs.

Nodes get a class, a sparse bag-of-words feature row drawn from a
class-specific word distribution, and edges drawn from a stochastic block
model with a given fraction of cross-class edges.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse as sp

from .data import GraphBundle
from .graph import Graph


def planted_bundle(
    n: int = 600,
    c: int = 4,
    d: int = 300,
    avg_degree: float = 4.0,
    noise_rate: float = 0.2,
    words_per_node: int = 12,
    signal: float = 0.35,
    seed: int = 0,
    name: str = "planted",
) -> GraphBundle:
    """Sample a bundle with about ``noise_rate`` of its edges between classes.

    ``signal`` is the probability that a word is drawn from the node's own
    class vocabulary instead of the shared one, so lower values make the
    features less informative.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % c
    rng.shuffle(labels)

    vocab = np.array_split(np.arange(d), c + 1)  # c class blocks + one shared block
    rows, cols = [], []
    for i in range(n):
        own = rng.random(words_per_node) < signal
        words = np.where(
            own,
            rng.choice(vocab[labels[i]], size=words_per_node),
            rng.integers(0, d, size=words_per_node),
        )
        words = np.unique(words)
        rows.extend([i] * words.size)
        cols.extend(words.tolist())
    x = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, d))

    m = int(round(avg_degree * n / 2))
    n_cross = int(round(noise_rate * m))
    by_class = [np.flatnonzero(labels == k) for k in range(c)]
    seen: set[int] = set()
    edges = []

    def add(u, v):
        if u == v:
            return False
        key = min(u, v) * n + max(u, v)
        if key in seen:
            return False
        seen.add(key)
        edges.append((u, v))
        return True

    while len(edges) < m - n_cross:
        k = rng.integers(c)
        u, v = rng.choice(by_class[k], size=2)
        add(int(u), int(v))
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if labels[u] != labels[v]:
            add(int(u), int(v))
    return GraphBundle(name, Graph.from_edges(n, edges), x, labels, c)


def random_graph(n: int, p: float, rng) -> Graph:
    """Erdos-Renyi graph, used by property tests."""
    rng = np.random.default_rng(rng)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))
