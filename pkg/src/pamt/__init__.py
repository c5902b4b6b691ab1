"""Label propagation with an adaptive attribute-similarity mask, then training.

The main entry points are :func:`pamt.trainer.train` and the ``pamt`` CLI.
"""

from .config import PRESETS, HyperParams, load_config
from .data import GraphBundle, SplitSpec, generate_split, load_bundle, save_bundle
from .graph import Graph, inject_structure_noise, normalize_adjacency, structure_noise_rate
from .propagation import PropagationConfig, propagate, propagate_labels
from .trainer import TrainingLog, Variant, evaluate, infer, train, train_pamt, train_pts

__all__ = [
    "PRESETS",
    "Graph",
    "GraphBundle",
    "HyperParams",
    "PropagationConfig",
    "SplitSpec",
    "TrainingLog",
    "Variant",
    "evaluate",
    "generate_split",
    "infer",
    "inject_structure_noise",
    "load_bundle",
    "load_config",
    "normalize_adjacency",
    "propagate",
    "propagate_labels",
    "save_bundle",
    "structure_noise_rate",
    "train",
    "train_pamt",
    "train_pts",
]
