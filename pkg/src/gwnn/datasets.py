"""Citation-network dataset ingest.

On-disk format is four TSV files (UTF-8, LF, `#` comments):

  edges.tsv     optional first line `n=<count>`, then `src<TAB>dst`
  features.tsv  header `# n=<n> p=<p> nnz=<k>`, then `node<TAB>feature<TAB>value`
  labels.tsv    header `# c=<classes>`, then `node<TAB>label` (one per node)
  splits.tsv    `node<TAB>{train|val|test}` (optional file; nodes may be absent)

Writing is canonical (fixed ordering and number formatting) so a
load/write round trip is byte-identical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .graphs import Graph, read_edge_list, write_edge_list

__all__ = [
    "Dataset",
    "load_dataset",
    "write_dataset",
    "make_paper_split",
    "label_rate",
]

SPLIT_ROLES = ("train", "val", "test")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable bundle of graph, binary features, labels, and split."""

    graph: Graph
    X: sp.csr_array
    labels: np.ndarray
    c: int
    split: dict
    split_mode: str

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _data_lines(path: Path):
    """Yield (lineno, stripped_line) skipping blanks and comments."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def _header_fields(path: Path, pattern: str, names: tuple) -> dict:
    """Parse `# k=<int> ...` metadata from the first comment line."""
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            m = re.match(pattern, line)
            if not m:
                break
            return {name: int(m.group(i + 1)) for i, name in enumerate(names)}
    raise DataError(f"{path}:1: missing or malformed header (expected {names})")


def _read_features(path: Path) -> sp.csr_array:
    hdr = _header_fields(
        path, r"#\s*n=(\d+)\s+p=(\d+)\s+nnz=(\d+)\s*$", ("n", "p", "nnz")
    )
    n, p, nnz = hdr["n"], hdr["p"], hdr["nnz"]
    rows, cols, vals = [], [], []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected node<TAB>feature<TAB>value")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        if not 0 <= i < n:
            raise DataError(f"{path}:{lineno}: node {i} out of range [0, {n})")
        if not 0 <= j < p:
            raise DataError(f"{path}:{lineno}: feature {j} out of range [0, {p})")
        if v not in (0.0, 1.0):
            raise DataError(f"{path}:{lineno}: feature value {v} is not binary")
        rows.append(i)
        cols.append(j)
        vals.append(v)
    X = sp.csr_array(
        (np.asarray(vals), (np.asarray(rows, dtype=np.int64),
                            np.asarray(cols, dtype=np.int64))),
        shape=(n, p),
    )
    if X.nnz != len(vals):
        raise DataError(f"{path}: duplicate (node, feature) entries")
    X.sort_indices()
    X.eliminate_zeros()
    if X.nnz != nnz:
        raise DataError(f"{path}: header declares nnz={nnz}, file has {X.nnz}")
    return X


def _read_labels(path: Path, n: int) -> tuple[np.ndarray, int]:
    hdr = _header_fields(path, r"#\s*c=(\d+)\s*$", ("c",))
    c = hdr["c"]
    if c < 1:
        raise DataError(f"{path}: class count must be >= 1")
    labels = np.full(n, -1, dtype=np.int64)
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected node<TAB>label")
        try:
            i, y = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        if not 0 <= i < n:
            raise DataError(f"{path}:{lineno}: node {i} out of range [0, {n})")
        if not 0 <= y < c:
            raise DataError(f"{path}:{lineno}: label {y} out of range [0, {c})")
        if labels[i] != -1:
            raise DataError(f"{path}:{lineno}: node {i} labeled twice")
        labels[i] = y
    missing = np.flatnonzero(labels == -1)
    if missing.size:
        raise DataError(f"{path}: node {missing[0]} has no label")
    return labels, c


def _read_splits(path: Path, n: int) -> dict:
    assigned = {}
    buckets: dict = {role: [] for role in SPLIT_ROLES}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected node<TAB>role")
        try:
            i = int(parts[0])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        role = parts[1]
        if role not in SPLIT_ROLES:
            raise DataError(f"{path}:{lineno}: unknown role {role!r}")
        if not 0 <= i < n:
            raise DataError(f"{path}:{lineno}: node {i} out of range [0, {n})")
        if i in assigned:
            raise DataError(
                f"{path}:{lineno}: node {i} already assigned to {assigned[i]!r}"
            )
        assigned[i] = role
        buckets[role].append(i)
    return {
        role: np.asarray(sorted(buckets[role]), dtype=np.int64)
        for role in SPLIT_ROLES
    }


def load_dataset(dir_path) -> Dataset:
    """Load and validate a dataset directory.

    splits.tsv, when present, takes precedence; otherwise the deterministic
    by-index paper split is constructed (20 per class, 500 val, 1000 test).
    Isolated nodes are legal here; Laplacian construction downstream is
    where they are rejected (or admitted via its allow_isolated flag).
    """
    d = Path(dir_path)
    if not d.is_dir():
        raise DataError(f"dataset directory not found: {d}")
    for fname in ("edges.tsv", "features.tsv", "labels.tsv"):
        if not (d / fname).is_file():
            raise DataError(f"missing {fname} in {d}")
    graph = read_edge_list(d / "edges.tsv")
    X = _read_features(d / "features.tsv")
    if X.shape[0] != graph.n:
        raise DataError(
            f"{d}: features declare n={X.shape[0]}, edges declare n={graph.n}"
        )
    labels, c = _read_labels(d / "labels.tsv", graph.n)
    splits_file = d / "splits.tsv"
    if splits_file.is_file():
        split = _read_splits(splits_file, graph.n)
        split_mode = "file"
    else:
        split = make_paper_split(labels)
        split_mode = "by_index"
    for role in SPLIT_ROLES:
        if split[role].size == 0:
            raise DataError(f"{d}: split {role!r} is empty")
    return Dataset(
        graph=graph, X=X, labels=labels, c=c, split=split, split_mode=split_mode
    )


def make_paper_split(
    labels: np.ndarray,
    per_class: int = 20,
    val_size: int = 500,
    test_size: int = 1000,
    seed: int | None = None,
) -> dict:
    """The experimental protocol split: ``per_class`` training nodes from
    each class, then ``val_size`` validation and ``test_size`` test nodes
    from the remainder.

    seed=None picks by ascending node index (deterministic without
    randomness); an integer seed shuffles candidates first.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    classes = np.unique(labels)
    order = np.arange(n)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n)
    train = []
    for cls in classes:
        members = order[labels[order] == cls]
        if members.size < per_class:
            raise DataError(
                f"class {cls} has {members.size} nodes, needs >= {per_class}"
            )
        train.extend(members[:per_class].tolist())
    train_set = set(train)
    rest = [i for i in order if i not in train_set]
    if len(rest) < val_size + test_size:
        raise DataError(
            f"n={n} leaves {len(rest)} nodes after training picks; "
            f"need {val_size} + {test_size}"
        )
    val = rest[:val_size]
    test = rest[val_size:val_size + test_size]
    return {
        "train": np.asarray(sorted(train), dtype=np.int64),
        "val": np.asarray(sorted(val), dtype=np.int64),
        "test": np.asarray(sorted(test), dtype=np.int64),
    }


def label_rate(dataset: Dataset) -> float:
    """Fraction of nodes used for training."""
    return dataset.split["train"].size / dataset.n


def _fmt_value(v: float) -> str:
    return str(int(v)) if v == int(v) else repr(float(v))


def write_dataset(dataset: Dataset, dir_path) -> None:
    """Write the four canonical TSV files (byte-stable ordering)."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    write_edge_list(dataset.graph, d / "edges.tsv")

    X = sp.csr_array(dataset.X)
    X.sort_indices()
    coo = X.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(d / "features.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={X.shape[0]} p={X.shape[1]} nnz={X.nnz}\n")
        for k in order:
            fh.write(f"{coo.row[k]}\t{coo.col[k]}\t{_fmt_value(coo.data[k])}\n")

    with open(d / "labels.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# c={dataset.c}\n")
        for i, y in enumerate(dataset.labels):
            fh.write(f"{i}\t{y}\n")

    with open(d / "splits.tsv", "w", encoding="utf-8", newline="\n") as fh:
        pairs = []
        for role in SPLIT_ROLES:
            pairs.extend((int(i), role) for i in dataset.split[role])
        for i, role in sorted(pairs):
            fh.write(f"{i}\t{role}\n")
