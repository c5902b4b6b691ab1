"""Training loops for PAMT, its ablations and the PTS baseline."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .config import HyperParams
from .data import GraphBundle, SplitSpec
from .graph import normalize_adjacency
from .nn import AdamState, ClassifierParams, adam_step, backward, forward, init_params, soft_cross_entropy, softmax
from .propagation import (
    PropagationConfig,
    build_propagation_matrix,
    build_similarity_mask,
    label_matrix,
    node_representation,
    propagate,
    propagate_labels,
)
from .sparse import SparseAdjacency


class Variant(str, Enum):
    PAMT = "pamt"
    PAMT0 = "pamt0"  # masked propagation, no refinement
    PAMT1 = "pamt1"  # refinement with direct replacement (beta = 0)
    PAMTR = "pamtr"  # mask from an untrained classifier
    PTS = "pts"
    LP_ONLY = "lp"
    MLP_ONLY = "mlp"


MASKED_VARIANTS = (Variant.PAMT, Variant.PAMT0, Variant.PAMT1, Variant.PAMTR)


def parse_variant(name) -> Variant:
    if isinstance(name, Variant):
        return name
    try:
        return Variant(str(name).lower())
    except ValueError:
        choices = ", ".join(v.value for v in Variant)
        raise ValueError(f"unknown variant {name!r} (choose from {choices})") from None


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    val_acc: float
    refined: bool


@dataclass
class TrainingLog:
    variant: str
    seed: int
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_acc: float = float("nan")
    test_acc: float = float("nan")

    def losses(self) -> list[float]:
        return [r.loss for r in self.epochs]

    def to_jsonl(self) -> str:
        lines = [json.dumps(asdict(r)) for r in self.epochs]
        lines.append(json.dumps({"test_acc": self.test_acc, "best_epoch": self.best_epoch}))
        return "\n".join(lines) + "\n"


def evaluate(predictions: np.ndarray, labels: np.ndarray, nodes: np.ndarray) -> float:
    """Fraction of ``nodes`` whose prediction matches the label."""
    nodes = np.asarray(nodes)
    if nodes.size == 0:
        raise ValueError("empty split")
    return float(np.mean(np.asarray(predictions)[nodes] == np.asarray(labels)[nodes]))


def infer(
    params: ClassifierParams,
    x,
    norm_adj: SparseAdjacency,
    cfg: PropagationConfig,
    masked: bool = False,
    mask_source: str = "softmax",
) -> np.ndarray:
    """Class ids from propagated classifier probabilities.

    By default the probabilities are spread over the unmasked normalized
    adjacency; ``masked`` uses the mask built from ``params`` instead.
    Ties go to the lowest class id.
    """
    logits, _ = forward(x, params)
    probs = softmax(logits)
    adj = norm_adj
    if masked:
        mask = build_similarity_mask(node_representation(params, x, mask_source), norm_adj)
        adj = build_propagation_matrix(norm_adj, mask)
    return np.argmax(propagate(adj, probs, cfg), axis=1)


@dataclass
class _Problem:
    """Everything derived once from a bundle and a split."""

    x: object
    labels: np.ndarray
    split: SplitSpec
    norm_adj: SparseAdjacency
    cfg: PropagationConfig
    y_l: np.ndarray
    c: int

    @classmethod
    def build(cls, bundle: GraphBundle, hp: HyperParams, split: SplitSpec | None):
        split = split if split is not None else bundle.split
        if split is None:
            raise ValueError("no split given and the bundle carries none")
        if split.train.size == 0:
            raise ValueError("empty training split")
        x = bundle.normalized_features() if hp.normalize_features else bundle.features
        return cls(
            x=x,
            labels=bundle.labels,
            split=split,
            norm_adj=normalize_adjacency(bundle.graph),
            cfg=PropagationConfig(hp.alpha, hp.K),
            y_l=label_matrix(bundle.labels, split.train, bundle.c),
            c=bundle.c,
        )

    def soft_labels(self, params: ClassifierParams | None, hp: HyperParams, fixed_mask=None) -> np.ndarray:
        """Propagate the training labels; masked unless ``params`` and ``fixed_mask`` are both None."""
        if params is None and fixed_mask is None:
            return propagate_labels(self.norm_adj, self.y_l, self.cfg)
        mask = fixed_mask
        if mask is None:
            mask = build_similarity_mask(node_representation(params, self.x, hp.mask_source), self.norm_adj)
        a_p = build_propagation_matrix(self.norm_adj, mask, renormalize=hp.renormalize_mask)
        return propagate_labels(a_p, self.y_l, self.cfg)


def _train_steps(x, params, targets, hp: HyperParams, epochs: int, rng) -> ClassifierParams:
    opt = AdamState(lr=hp.lr)
    for _ in range(epochs):
        _, cache = forward(x, params, train=True, drop=hp.drop, rng=rng)
        adam_step(params, backward(cache, targets, params, wd=hp.wd), opt)
    return params


def init_classifier(x, labels, split: SplitSpec, hp: HyperParams, c: int, rng=None, params=None) -> ClassifierParams:
    """Train a classifier on the labelled training nodes only, for ``hp.init_epochs`` epochs.

    Unlabelled rows have all-zero targets and so drop out of the loss.
    With ``init_epochs = 0`` the freshly initialized parameters come back
    untouched.
    """
    if len(split.train) == 0:
        raise ValueError("empty training split")
    rng = np.random.default_rng(hp.seed if rng is None else rng)
    if params is None:
        params = init_params(x.shape[1], hp.dim, c, rng)
    return _train_steps(x, params, label_matrix(labels, split.train, c), hp, hp.init_epochs, rng)


def _fit(prob: _Problem, params, y_soft, hp: HyperParams, rng, log: TrainingLog, predict, refresh=None, beta=0.0):
    """Full-batch training with early stopping on validation accuracy.

    ``refresh`` (if given) returns new soft labels and is called at every
    epoch divisible by ``hp.t_u``; the result is blended in with momentum
    ``beta``. Returns the best-validation parameter snapshot.
    """
    opt = AdamState(lr=hp.lr)
    best = params.copy()
    best_acc, best_epoch = -1.0, 0
    for epoch in range(1, hp.max_epochs + 1):
        refined = refresh is not None and epoch % hp.t_u == 0
        if refined:
            y_soft = beta * y_soft + (1.0 - beta) * refresh(params)
        logits, cache = forward(prob.x, params, train=True, drop=hp.drop, rng=rng)
        loss = soft_cross_entropy(logits, y_soft)
        adam_step(params, backward(cache, y_soft, params, wd=hp.wd), opt)
        val_acc = evaluate(predict(params), prob.labels, prob.split.val) if prob.split.val.size else 0.0
        log.epochs.append(EpochRecord(epoch, loss, val_acc, refined))
        if val_acc > best_acc:
            best, best_acc, best_epoch = params.copy(), val_acc, epoch
        elif epoch - best_epoch >= hp.patience:
            break
    log.best_epoch, log.best_val_acc = best_epoch, (best_acc if best_epoch else float("nan"))
    return best, y_soft


def _finish(prob: _Problem, params, hp: HyperParams, log: TrainingLog, predict):
    if prob.split.test.size:
        log.test_acc = evaluate(predict(params), prob.labels, prob.split.test)
    return params, log


def train_pamt(
    bundle: GraphBundle,
    hp: HyperParams,
    variant=Variant.PAMT,
    split: SplitSpec | None = None,
    fixed_mask: SparseAdjacency | None = None,
):
    """Run PAMT or one of its ablations; returns ``(best_params, TrainingLog)``.

    ``fixed_mask`` replaces the classifier-derived mask everywhere (initial
    soft labels and refinements); it exists for experiments and for
    checking reductions to PTS.
    """
    variant = parse_variant(variant)
    if variant not in MASKED_VARIANTS:
        raise ValueError(f"train_pamt does not run variant {variant.value!r}")
    prob = _Problem.build(bundle, hp, split)
    rng = np.random.default_rng(hp.seed)
    params = init_params(prob.x.shape[1], hp.dim, prob.c, rng)
    if variant is not Variant.PAMTR:
        params = init_classifier(prob.x, prob.labels, prob.split, hp, prob.c, rng, params)

    y_soft = prob.soft_labels(params, hp, fixed_mask)
    refresh = None
    if variant is not Variant.PAMT0:
        refresh = lambda p: prob.soft_labels(p, hp, fixed_mask)  # noqa: E731
    beta = 0.0 if variant is Variant.PAMT1 else hp.beta

    predict = lambda p: infer(p, prob.x, prob.norm_adj, prob.cfg, hp.masked_inference, hp.mask_source)  # noqa: E731
    log = TrainingLog(variant.value, hp.seed)
    best, _ = _fit(prob, params, y_soft, hp, rng, log, predict, refresh, beta)
    return _finish(prob, best, hp, log, predict)


def train_pts(bundle: GraphBundle, hp: HyperParams, split: SplitSpec | None = None):
    """Propagation-then-training with static soft labels from the unmasked adjacency."""
    prob = _Problem.build(bundle, hp, split)
    rng = np.random.default_rng(hp.seed)
    params = init_params(prob.x.shape[1], hp.dim, prob.c, rng)
    y_soft = prob.soft_labels(None, hp)
    predict = lambda p: infer(p, prob.x, prob.norm_adj, prob.cfg)  # noqa: E731
    log = TrainingLog(Variant.PTS.value, hp.seed)
    best, _ = _fit(prob, params, y_soft, hp, rng, log, predict)
    return _finish(prob, best, hp, log, predict)


def train_mlp(bundle: GraphBundle, hp: HyperParams, split: SplitSpec | None = None):
    """Classifier trained on the labelled nodes only, predicting without propagation."""
    prob = _Problem.build(bundle, hp, split)
    rng = np.random.default_rng(hp.seed)
    params = init_params(prob.x.shape[1], hp.dim, prob.c, rng)
    predict = lambda p: np.argmax(forward(prob.x, p)[0], axis=1)  # noqa: E731
    log = TrainingLog(Variant.MLP_ONLY.value, hp.seed)
    best, _ = _fit(prob, params, prob.y_l, hp, rng, log, predict)
    return _finish(prob, best, hp, log, predict)


def run_label_propagation(bundle: GraphBundle, hp: HyperParams, split: SplitSpec | None = None):
    """Plain label propagation: argmax of the propagated training labels, no classifier."""
    prob = _Problem.build(bundle, hp, split)
    pred = np.argmax(prob.soft_labels(None, hp), axis=1)
    log = TrainingLog(Variant.LP_ONLY.value, hp.seed)
    if prob.split.val.size:
        log.best_val_acc = evaluate(pred, prob.labels, prob.split.val)
    if prob.split.test.size:
        log.test_acc = evaluate(pred, prob.labels, prob.split.test)
    return None, log


def train(bundle: GraphBundle, hp: HyperParams, variant, split: SplitSpec | None = None):
    """Dispatch on ``variant``; returns ``(params or None, TrainingLog)``."""
    variant = parse_variant(variant)
    if variant in MASKED_VARIANTS:
        return train_pamt(bundle, hp, variant, split)
    if variant is Variant.PTS:
        return train_pts(bundle, hp, split)
    if variant is Variant.MLP_ONLY:
        return train_mlp(bundle, hp, split)
    return run_label_propagation(bundle, hp, split)
