"""Dataset bundles on disk, random splits and archive conversion.

A bundle is a directory of plain-text files::

    meta.json      {"n", "d", "c", "name", "format_version"}
    edges.tsv      "u<TAB>v" per undirected edge
    features.csv   dense rows, comma separated          (either this ...)
    features.tsv   "row<TAB>col<TAB>value" triplets     (... or this)
    labels.tsv     "node<TAB>class" for labelled nodes
    splits.json    optional {"train": [...], "val": [...], "test": [...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse as sp
from scipy.sparse import csgraph

from .graph import UNKNOWN, Graph

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SplitSpec:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name, np.sort(np.asarray(getattr(self, name), dtype=np.int64)))
        sets = [set(self.train.tolist()), set(self.val.tolist()), set(self.test.tolist())]
        if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
            raise ValueError("split partitions overlap")

    def to_dict(self) -> dict:
        return {"train": self.train.tolist(), "val": self.val.tolist(), "test": self.test.tolist()}

    def __eq__(self, other):
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("train", "val", "test"))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GraphBundle:
    name: str
    graph: Graph
    features: object  # ndarray or scipy CSR, n x d
    labels: np.ndarray  # class id per node, UNKNOWN where absent
    num_classes: int
    split: SplitSpec | None = field(default=None)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        feats = self.features
        feats = sp.csr_matrix(feats, dtype=np.float64) if sp.issparse(feats) else np.asarray(feats, dtype=np.float64)
        object.__setattr__(self, "features", feats)
        n = self.graph.n
        if feats.shape[0] != n or labels.shape != (n,):
            raise ValueError(f"inconsistent node counts: graph {n}, features {feats.shape}, labels {labels.shape}")
        values = feats.data if sp.issparse(feats) else feats
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite feature value")
        if np.any((labels < UNKNOWN) | (labels >= self.num_classes)):
            raise ValueError(f"label id outside [0, {self.num_classes})")
        if self.split is not None:
            for part in (self.split.train, self.split.val, self.split.test):
                if part.size and (part.max() >= n or np.any(labels[part] == UNKNOWN)):
                    raise ValueError("split contains a node without a known label")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def c(self) -> int:
        return self.num_classes

    def stats(self) -> dict:
        return {"name": self.name, "n": self.n, "edges": self.graph.num_edges, "d": self.d, "c": self.c}

    def with_graph(self, graph: Graph) -> GraphBundle:
        return GraphBundle(self.name, graph, self.features, self.labels, self.num_classes, self.split)

    def with_split(self, split: SplitSpec | None) -> GraphBundle:
        return GraphBundle(self.name, self.graph, self.features, self.labels, self.num_classes, split)

    def normalized_features(self):
        """Row-L1-normalized copy of the features (all-zero rows stay zero)."""
        x = self.features
        sums = np.asarray(abs(x).sum(axis=1)).ravel()
        inv = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
        if sp.issparse(x):
            return sp.csr_matrix(sp.diags(inv) @ x)
        return x * inv[:, None]

    def __eq__(self, other):
        if not isinstance(other, GraphBundle):
            return NotImplemented
        fa, fb = self.features, other.features
        if sp.issparse(fa) != sp.issparse(fb) or fa.shape != fb.shape:
            return False
        same_feats = (fa != fb).nnz == 0 if sp.issparse(fa) else np.array_equal(fa, fb)
        return (
            self.name == other.name
            and self.num_classes == other.num_classes
            and self.graph == other.graph
            and same_feats
            and np.array_equal(self.labels, other.labels)
            and self.split == other.split
        )

    __hash__ = None


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def _read_lines(path: Path):
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _ints(path: Path, lineno: int, line: str, k: int) -> list[int]:
    parts = line.split("\t")
    if len(parts) != k:
        raise ValueError(f"{path.name}:{lineno}: expected {k} tab-separated fields")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"{path.name}:{lineno}: non-integer id") from None


def _require(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"missing file: {path}")
    return path


def load_bundle(path) -> GraphBundle:
    """Read and validate a bundle directory."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"missing file: {root} (not a bundle directory)")
    meta = json.loads(_require(root / "meta.json").read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format_version {meta.get('format_version')!r}")
    n, d, c = int(meta["n"]), int(meta["d"]), int(meta["c"])

    epath = _require(root / "edges.tsv")
    edges = []
    for lineno, line in _read_lines(epath):
        u, v = _ints(epath, lineno, line, 2)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edges.tsv:{lineno}: node id >= n={n}")
        if u == v:
            raise ValueError(f"edges.tsv:{lineno}: self-loop {u}")
        edges.append((u, v))
    graph = Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2))

    dense, triplets = root / "features.csv", root / "features.tsv"
    if dense.is_file() and triplets.is_file():
        raise ValueError(f"{root}: both features.csv and features.tsv present")
    if triplets.is_file():
        rows, cols, vals = [], [], []
        for lineno, line in _read_lines(triplets):
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"features.tsv:{lineno}: expected 3 tab-separated fields")
            try:
                r, col, val = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValueError(f"features.tsv:{lineno}: non-numeric feature") from None
            if not (0 <= r < n and 0 <= col < d):
                raise ValueError(f"features.tsv:{lineno}: index outside {n}x{d}")
            rows.append(r), cols.append(col), vals.append(val)
        feats = sp.csr_matrix((vals, (rows, cols)), shape=(n, d), dtype=np.float64)
        feats.sum_duplicates()
        feats.sort_indices()
    else:
        _require(dense)
        feats = np.zeros((n, d))
        count = 0
        for lineno, line in _read_lines(dense):
            if count >= n:
                raise ValueError(f"features.csv:{lineno}: more than n={n} rows")
            try:
                row = [float(v) for v in line.split(",")]
            except ValueError:
                raise ValueError(f"features.csv:{lineno}: non-numeric feature") from None
            if len(row) != d:
                raise ValueError(f"features.csv:{lineno}: expected {d} values, got {len(row)}")
            feats[count] = row
            count += 1
        if count != n:
            raise ValueError(f"features.csv: expected {n} rows, got {count}")

    lpath = _require(root / "labels.tsv")
    labels = np.full(n, UNKNOWN, dtype=np.int64)
    for lineno, line in _read_lines(lpath):
        node, cls = _ints(lpath, lineno, line, 2)
        if not 0 <= node < n:
            raise ValueError(f"labels.tsv:{lineno}: node id >= n={n}")
        if not 0 <= cls < c:
            raise ValueError(f"labels.tsv:{lineno}: label id >= c={c}")
        labels[node] = cls

    split = None
    spath = root / "splits.json"
    if spath.is_file():
        s = json.loads(spath.read_text())
        split = SplitSpec(s["train"], s["val"], s["test"])
    return GraphBundle(str(meta.get("name", root.name)), graph, feats, labels, c, split)


def save_bundle(bundle: GraphBundle, path) -> None:
    """Write ``bundle`` in canonical form (sorted edges, sorted triplets)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {"n": bundle.n, "d": bundle.d, "c": bundle.c, "name": bundle.name, "format_version": FORMAT_VERSION}
    (root / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (root / "edges.tsv").write_text("".join(f"{u}\t{v}\n" for u, v in bundle.graph.edge_list().tolist()))

    x = bundle.features
    for stale in ("features.csv", "features.tsv"):
        (root / stale).unlink(missing_ok=True)
    if sp.issparse(x):
        coo = sp.csr_matrix(x)
        coo.sort_indices()
        rows = np.repeat(np.arange(coo.shape[0]), np.diff(coo.indptr))
        text = "".join(f"{r}\t{col}\t{_fmt(v)}\n" for r, col, v in zip(rows.tolist(), coo.indices.tolist(), coo.data.tolist()))
        (root / "features.tsv").write_text(text)
    else:
        (root / "features.csv").write_text("".join(",".join(_fmt(v) for v in row) + "\n" for row in x.tolist()))

    known = np.flatnonzero(bundle.labels != UNKNOWN)
    (root / "labels.tsv").write_text("".join(f"{i}\t{bundle.labels[i]}\n" for i in known.tolist()))
    spath = root / "splits.json"
    if bundle.split is not None:
        spath.write_text(json.dumps(bundle.split.to_dict()) + "\n")
    else:
        spath.unlink(missing_ok=True)


def generate_split(bundle: GraphBundle, per_class_train: int = 20, val_size: int = 500, seed: int = 0) -> SplitSpec:
    """Random split: ``per_class_train`` nodes of each class, then ``val_size`` validation nodes.

    Every remaining labelled node is a test node.
    """
    labels = bundle.labels
    labelled = np.flatnonzero(labels != UNKNOWN)
    if labelled.size < per_class_train * bundle.c + val_size + 1:
        raise ValueError(
            f"sizes infeasible: {labelled.size} labelled nodes < {per_class_train}*{bundle.c} + {val_size} + 1"
        )
    rng = np.random.default_rng(seed)
    train = []
    for k in range(bundle.c):
        members = np.flatnonzero(labels == k)
        if members.size < per_class_train:
            raise ValueError(f"class too small: class {k} has {members.size} < {per_class_train} nodes")
        train.append(rng.choice(members, size=per_class_train, replace=False))
    train = np.concatenate(train)
    rest = np.setdiff1d(labelled, train)
    val = rng.choice(rest, size=val_size, replace=False)
    test = np.setdiff1d(rest, val)
    return SplitSpec(train, val, test)


def largest_connected_component(adj: sp.spmatrix) -> np.ndarray:
    """Sorted node ids of the largest connected component."""
    _, comp = csgraph.connected_components(adj, directed=False)
    biggest = np.argmax(np.bincount(comp))
    return np.flatnonzero(comp == biggest)


def _csr_from_npz(z, prefix: str):
    if f"{prefix}_matrix" in z:
        return sp.csr_matrix(z[f"{prefix}_matrix"])
    return sp.csr_matrix(
        (z[f"{prefix}_data"], z[f"{prefix}_indices"], z[f"{prefix}_indptr"]), shape=tuple(z[f"{prefix}_shape"])
    )


def bundle_from_npz(path, name: str | None = None, lcc: bool = True) -> GraphBundle:
    """Convert a citation-graph ``.npz`` archive (CSR ``adj_*``/``attr_*`` arrays plus ``labels``).

    The adjacency is symmetrized and binarized, self-loops are dropped and,
    by default, only the largest connected component is kept.
    """
    path = Path(path)
    with np.load(_require(path), allow_pickle=True) as z:
        adj = _csr_from_npz(z, "adj")
        attr = _csr_from_npz(z, "attr")
        if "labels" in z:
            labels = np.asarray(z["labels"]).ravel()
        else:
            labels = sp.csr_matrix(
                (z["labels_data"], z["labels_indices"], z["labels_indptr"]), shape=tuple(z["labels_shape"])
            ).argmax(axis=1).A1
    adj = ((adj + adj.T) > 0).astype(np.float64).tolil()
    adj.setdiag(0)
    adj = sp.csr_matrix(adj)
    adj.eliminate_zeros()
    if lcc:
        keep = largest_connected_component(adj)
        adj, attr, labels = adj[keep][:, keep], attr[keep], labels[keep]
    classes, labels = np.unique(labels, return_inverse=True)
    coo = sp.triu(adj, k=1).tocoo()
    graph = Graph.from_edges(adj.shape[0], np.stack([coo.row, coo.col], axis=1))
    attr = sp.csr_matrix(attr, dtype=np.float64)
    attr.eliminate_zeros()
    attr.sort_indices()
    return GraphBundle(name or path.stem, graph, attr, labels, len(classes))
