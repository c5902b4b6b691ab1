"""Approximate personalized-PageRank propagation and the similarity mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import ClassifierParams, forward, softmax
from .sparse import SparseAdjacency, gram_on_pattern, hadamard, spmm

MASK_SOURCES = ("softmax", "logits")


@dataclass(frozen=True)
class PropagationConfig:
    alpha: float = 0.1
    K: int = 10

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K={self.K} must be a positive integer")


def node_representation(params: ClassifierParams, x, source: str = "softmax") -> np.ndarray:
    """Eval-mode classifier output used to build the mask.

    ``softmax`` keeps every mask entry in [0, 1]; ``logits`` uses the raw
    scores and can produce negative propagation weights.
    """
    logits, _ = forward(x, params)
    if source == "softmax":
        return softmax(logits)
    if source == "logits":
        return logits
    raise ValueError(f"unknown mask source {source!r}; expected one of {MASK_SOURCES}")


def build_similarity_mask(h: np.ndarray, norm_adj: SparseAdjacency) -> SparseAdjacency:
    """Row dot products of ``h`` on every stored entry of ``norm_adj``, diagonal included."""
    return gram_on_pattern(norm_adj, h)


def build_propagation_matrix(
    norm_adj: SparseAdjacency, mask: SparseAdjacency, renormalize: bool = False
) -> SparseAdjacency:
    """Masked adjacency ``norm_adj * mask`` (entrywise).

    With ``renormalize`` each row is rescaled to sum to one; rows that
    vanish under the mask are left at zero. This breaks symmetry and is
    off by default.
    """
    a_p = hadamard(norm_adj, mask)
    if not renormalize:
        return a_p
    sums = np.bincount(a_p.rows(), weights=a_p.data, minlength=a_p.n)
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return SparseAdjacency(a_p.n, a_p.indptr, a_p.indices, a_p.data * scale[a_p.rows()], False)


def propagate(a: SparseAdjacency, m: np.ndarray, cfg: PropagationConfig) -> np.ndarray:
    """K-step power iteration ``Z <- (1 - alpha) a Z + alpha m`` starting from ``Z = m``.

    Equals ``((1-alpha)^K a^K + alpha * sum_{k<K} (1-alpha)^k a^k) m``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != a.n:
        raise ValueError(f"dimension mismatch: matrix is {a.n}x{a.n}, operand has shape {m.shape}")
    z = m
    restart = cfg.alpha * m
    for _ in range(cfg.K):
        z = (1.0 - cfg.alpha) * spmm(a, z) + restart
    return z


def propagate_labels(a_p: SparseAdjacency, y_l: np.ndarray, cfg: PropagationConfig) -> np.ndarray:
    """Soft labels from spreading the observed one-hot rows over ``a_p``."""
    y_l = np.asarray(y_l, dtype=np.float64)
    if np.any(y_l < 0):
        raise ValueError("negative label entry")
    return propagate(a_p, y_l, cfg)


def label_matrix(labels: np.ndarray, nodes: np.ndarray, c: int) -> np.ndarray:
    """``n x c`` matrix with one-hot rows for ``nodes`` and zeros elsewhere."""
    labels = np.asarray(labels)
    y = np.zeros((labels.shape[0], c))
    y[nodes, labels[nodes]] = 1.0
    return y
