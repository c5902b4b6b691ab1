"""One-hidden-layer classifier with hand-written backprop and Adam.

Features may be a dense array or a scipy sparse matrix; bag-of-words
inputs stay sparse through the first layer and its gradient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import sparse as sp

CHECKPOINT_FORMAT = "pamt-classifier"
CHECKPOINT_VERSION = 1


@dataclass
class ClassifierParams:
    W1: np.ndarray  # d x f
    b1: np.ndarray  # f
    W2: np.ndarray  # f x c
    b2: np.ndarray  # c

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.W1.shape[0], self.W1.shape[1], self.W2.shape[1]

    def tensors(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> ClassifierParams:
        return ClassifierParams(**{k: v.copy() for k, v in self.tensors().items()})

    def zeros_like(self) -> ClassifierParams:
        return ClassifierParams(**{k: np.zeros_like(v) for k, v in self.tensors().items()})


def init_params(d: int, f: int, c: int, rng) -> ClassifierParams:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(rng)

    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return ClassifierParams(glorot(d, f), np.zeros(f), glorot(f, c), np.zeros(c))


@dataclass
class ForwardCache:
    x: object  # input after dropout
    z1: np.ndarray
    hidden: np.ndarray  # relu(z1) after dropout
    hidden_mask: np.ndarray | None
    keep: float
    logits: np.ndarray


def _dropout_input(x, keep: float, rng: np.random.Generator):
    if sp.issparse(x):
        x = sp.csr_matrix(x, copy=True)
        x.data *= (rng.random(x.data.shape) < keep) / keep
        return x
    return x * ((rng.random(x.shape) < keep) / keep)


def forward(x, p: ClassifierParams, train: bool = False, drop: float = 0.0, rng=None):
    """Compute logits ``relu(x W1 + b1) W2 + b2``.

    In training mode inverted dropout with rate ``drop`` is applied to the
    input and to the hidden activations, and a ``ForwardCache`` is returned
    for ``backward``; in eval mode the cache is ``None``.
    """
    if not 0.0 <= drop < 1.0:
        raise ValueError(f"dropout rate {drop} outside [0, 1)")
    if x.shape[1] != p.W1.shape[0]:
        raise ValueError(f"feature dimension {x.shape[1]} does not match W1 {p.W1.shape}")
    keep = 1.0 - drop
    use_dropout = train and drop > 0.0
    if use_dropout:
        rng = np.random.default_rng(rng)
        x = _dropout_input(x, keep, rng)
    z1 = np.asarray(x @ p.W1) + p.b1
    hidden = np.maximum(z1, 0.0)
    mask = None
    if use_dropout:
        mask = (rng.random(hidden.shape) < keep) / keep
        hidden = hidden * mask
    logits = hidden @ p.W2 + p.b2
    if not train:
        return logits, None
    return logits, ForwardCache(x, z1, hidden, mask, keep, logits)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(z))


def _targets(y_soft: np.ndarray, node_weights) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized targets and per-node weights scaled to sum to one."""
    y_soft = np.asarray(y_soft, dtype=np.float64)
    if np.any(y_soft < 0):
        raise ValueError("negative soft-label entry")
    n = y_soft.shape[0]
    w = np.ones(n) if node_weights is None else np.asarray(node_weights, dtype=np.float64).copy()
    if w.shape != (n,) or np.any(w < 0):
        raise ValueError("node weights must be a non-negative vector with one entry per row")
    mass = y_soft.sum(axis=1)
    empty = mass <= 0
    w[empty] = 0.0
    yhat = np.divide(y_soft, mass[:, None], out=np.zeros_like(y_soft), where=~empty[:, None])
    total = w.sum()
    return yhat, (w / total if total > 0 else w)


def soft_cross_entropy(logits: np.ndarray, y_soft: np.ndarray, node_weights=None) -> float:
    """Weighted mean cross-entropy against L1-normalized soft labels.

    Rows whose soft label is all zeros carry no weight. Returns 0.0 when no
    row carries weight.
    """
    if logits.shape != np.shape(y_soft):
        raise ValueError(f"shape mismatch: logits {logits.shape}, targets {np.shape(y_soft)}")
    yhat, w = _targets(y_soft, node_weights)
    return float(-(w * (yhat * log_softmax(logits)).sum(axis=1)).sum())


def l2_penalty(p: ClassifierParams, wd: float) -> float:
    return 0.5 * wd * sum(float((t * t).sum()) for t in p.tensors().values())


def backward(cache: ForwardCache, y_soft, p: ClassifierParams, node_weights=None, wd: float = 0.0):
    """Gradient of ``soft_cross_entropy + wd/2 * ||theta||^2``.

    The dropout masks recorded in ``cache`` are treated as constants.
    """
    if cache.logits.shape != np.shape(y_soft) or cache.hidden.shape[1] != p.W2.shape[0]:
        raise ValueError("cache does not match parameters or targets")
    yhat, w = _targets(y_soft, node_weights)
    dlogits = w[:, None] * softmax(cache.logits) * yhat.sum(axis=1, keepdims=True) - w[:, None] * yhat
    dW2 = cache.hidden.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dh = dlogits @ p.W2.T
    if cache.hidden_mask is not None:
        dh = dh * cache.hidden_mask
    dz1 = dh * (cache.z1 > 0)
    dW1 = np.asarray(cache.x.T @ dz1)
    db1 = dz1.sum(axis=0)
    return ClassifierParams(dW1 + wd * p.W1, db1 + wd * p.b1, dW2 + wd * p.W2, db2 + wd * p.b2)


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(p: ClassifierParams, grads: ClassifierParams, s: AdamState):
    """One bias-corrected Adam update, in place. Returns ``(p, s)``.

    Weight decay is not handled here; ``backward`` already folds it into
    the gradient.
    """
    s.step += 1
    c1 = 1.0 - s.beta1**s.step
    c2 = 1.0 - s.beta2**s.step
    for name, g in grads.tensors().items():
        theta = getattr(p, name)
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} does not match {name} {theta.shape}")
        m = s.m.setdefault(name, np.zeros_like(theta))
        v = s.v.setdefault(name, np.zeros_like(theta))
        m *= s.beta1
        m += (1.0 - s.beta1) * g
        v *= s.beta2
        v += (1.0 - s.beta2) * g * g
        theta -= s.lr * (m / c1) / (np.sqrt(v / c2) + s.eps)
    return p, s


def save_params(path, p: ClassifierParams, meta: dict | None = None) -> None:
    """Write a JSON checkpoint: versioned header plus row-major tensor values."""
    record = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "meta": meta or {},
        "tensors": [
            {"name": k, "shape": list(v.shape), "values": v.ravel().tolist()}
            for k, v in p.tensors().items()
        ],
    }
    Path(path).write_text(json.dumps(record) + "\n")


def load_params(path) -> ClassifierParams:
    record = json.loads(Path(path).read_text())
    if record.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a classifier checkpoint")
    if record.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {record.get('version')}")
    tensors = {
        t["name"]: np.array(t["values"], dtype=np.float64).reshape(t["shape"]) for t in record["tensors"]
    }
    return ClassifierParams(**tensors)
