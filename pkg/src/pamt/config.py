"""Hyperparameters, per-dataset presets and the flat ``key = value`` config format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .propagation import MASK_SOURCES

# knobs that have no generic default; a config must name a preset or set all of them
TUNED_KEYS = ("dim", "alpha", "wd", "lr", "beta", "K", "drop", "t_u")

PRESETS: dict[str, dict] = {
    "cora_ml": dict(dim=128, alpha=0.10, wd=0.025, lr=0.05, beta=0.50, K=10, drop=0.20, t_u=30),
    "citeseer": dict(dim=128, alpha=0.15, wd=0.055, lr=0.10, beta=0.25, K=10, drop=0.15, t_u=20),
    "pubmed": dict(dim=128, alpha=0.10, wd=0.015, lr=0.10, beta=0.10, K=10, drop=0.35, t_u=10),
    "ms_academic": dict(dim=256, alpha=0.10, wd=0.010, lr=0.05, beta=0.10, K=10, drop=0.35, t_u=10),
}


@dataclass(frozen=True)
class HyperParams:
    dim: int
    alpha: float
    wd: float
    lr: float
    beta: float
    K: int
    drop: float
    t_u: int
    max_epochs: int = 1000
    init_epochs: int = 100
    patience: int = 100
    seed: int = 0
    per_class_train: int = 20
    val_size: int = 500
    normalize_features: bool = False
    renormalize_mask: bool = False
    mask_source: str = "softmax"
    masked_inference: bool = False

    def __post_init__(self):
        checks = [
            (self.dim >= 1, "dim must be >= 1"),
            (0.0 <= self.alpha <= 1.0, "alpha must lie in [0, 1]"),
            (self.wd >= 0.0, "wd must be >= 0"),
            (self.lr > 0.0, "lr must be > 0"),
            (0.0 <= self.beta < 1.0, "beta must lie in [0, 1)"),
            (self.K >= 1, "K must be >= 1"),
            (0.0 <= self.drop < 1.0, "drop must lie in [0, 1)"),
            (self.t_u >= 1, "t_u must be >= 1"),
            (self.max_epochs >= 0, "max_epochs must be >= 0"),
            (self.init_epochs >= 0, "init_epochs must be >= 0"),
            (self.patience >= 1, "patience must be >= 1"),
            (self.per_class_train >= 1, "per_class_train must be >= 1"),
            (self.val_size >= 0, "val_size must be >= 0"),
            (self.mask_source in MASK_SOURCES, f"mask_source must be one of {MASK_SOURCES}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @classmethod
    def preset(cls, name: str, **overrides) -> HyperParams:
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
        return cls(**{**base, **overrides})

    def replace(self, **changes) -> HyperParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_TYPES = {f.name: f.type for f in fields(HyperParams)}


def _parse_value(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ValueError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str, default_preset: str | None = None) -> HyperParams:
    """Parse ``key = value`` lines; ``preset = <name>`` starts from a named preset.

    Unknown keys are rejected. Without a preset every tuned knob must be set.
    """
    values: dict = {}
    preset = default_preset
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        if key == "preset":
            preset = raw
            continue
        if key not in _TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    if preset is not None:
        return HyperParams.preset(preset, **values)
    missing = [k for k in TUNED_KEYS if k not in values]
    if missing:
        raise ValueError(f"missing required key(s) without default: {', '.join(missing)}")
    return HyperParams(**values)


def load_config(path, default_preset: str | None = None) -> HyperParams:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"missing file: {path}")
    return parse_config(path.read_text(), default_preset)


def dump_config(hp: HyperParams) -> str:
    lines = []
    for k, v in hp.to_dict().items():
        lines.append(f"{k} = {str(v).lower() if isinstance(v, bool) else v}")
    return "\n".join(lines) + "\n"
