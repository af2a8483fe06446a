"""Undirected graphs in CSR form, the normalized Laplacian, and the sparse
matrix kernels the rest of the package builds on.

Sparse matrices are ``scipy.sparse.csr_array`` with float64 data; dense
matrices are C-ordered float64 ``numpy.ndarray``. The helpers here keep the
CSR contract tight: column indices strictly increasing within each row and no
explicitly stored zeros after any sparsify pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError

__all__ = [
    "Graph",
    "load_graph",
    "read_edge_list",
    "write_edge_list",
    "normalized_laplacian",
    "spmm",
    "csr_clean",
    "check_csr",
    "sparsify",
    "grid_graph",
    "preferential_attachment_graph",
    "random_connected_graph",
]


def csr_clean(m) -> sp.csr_array:
    """Return ``m`` as a canonical float64 CSR array: sorted indices,
    duplicates summed, explicit zeros removed."""
    out = sp.csr_array(m, dtype=np.float64)
    out.sum_duplicates()
    out.sort_indices()
    out.eliminate_zeros()
    return out


def check_csr(m: sp.csr_array) -> None:
    """Assert the CSR invariants: strictly increasing column indices within
    each row and no stored zeros. Raises ValueError on violation."""
    indptr, indices, data = m.indptr, m.indices, m.data
    for i in range(m.shape[0]):
        row = indices[indptr[i]:indptr[i + 1]]
        if row.size > 1 and not np.all(np.diff(row) > 0):
            raise ValueError(f"row {i}: column indices not strictly increasing")
    if np.any(data == 0.0):
        raise ValueError("explicitly stored zero entries present")


def sparsify(m, threshold: float) -> sp.csr_array:
    """Drop every stored entry with ``|value| < threshold`` (and any exact
    zeros), returning a canonical CSR array.

    ``threshold=0`` removes only explicit zeros.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    m = sp.csr_array(m, dtype=np.float64)
    coo = m.tocoo()
    keep = (np.abs(coo.data) >= threshold) & (coo.data != 0.0)
    out = sp.csr_array(
        (coo.data[keep], (coo.row[keep], coo.col[keep])), shape=m.shape
    )
    out.sort_indices()
    return out


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    ``edges`` holds each undirected pair once as (i, j) with i < j, sorted;
    ``adjacency`` is the symmetric 0/1 CSR matrix with zero diagonal.
    """

    n: int
    edges: np.ndarray          # (m, 2) int64, i < j, lexicographically sorted
    adjacency: sp.csr_array    # n x n, nnz == 2 * len(edges)

    def __post_init__(self):
        self.edges.flags.writeable = False

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.int64)


def load_graph(edge_list, n: int) -> Graph:
    """Build a Graph from a sequence of (i, j) pairs.

    Self-loops are dropped; duplicate and reversed-duplicate pairs are
    merged. Indices outside [0, n) are rejected with the offending entry's
    1-based position.
    """
    if n <= 0:
        raise DataError(f"node count must be positive, got {n}")
    pairs = []
    for lineno, pair in enumerate(edge_list, start=1):
        i, j = int(pair[0]), int(pair[1])
        if not (0 <= i < n and 0 <= j < n):
            raise DataError(f"edge line {lineno}: index ({i}, {j}) out of range for n={n}")
        if i == j:
            continue
        pairs.append((i, j) if i < j else (j, i))
    if pairs:
        edges = np.unique(np.asarray(pairs, dtype=np.int64), axis=0)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sp.csr_array(
        (np.ones(rows.size, dtype=np.float64), (rows, cols)), shape=(n, n)
    )
    adj.sort_indices()
    return Graph(n=n, edges=edges, adjacency=adj)


def read_edge_list(path) -> Graph:
    """Parse an edge-list file and build the Graph.

    Format: UTF-8 text, one ``src<TAB>dst`` pair of 0-indexed decimal
    integers per line; ``#``-prefixed lines are comments. The first
    non-comment line may be ``n=<count>``; otherwise n = max index + 1.
    """
    path = Path(path)
    n_declared = None
    pairs = []
    linenos = []
    with path.open("r", encoding="utf-8") as fh:
        first_data_line = True
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if first_data_line and line.startswith("n="):
                try:
                    n_declared = int(line[2:])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad node count line {line!r}") from None
                first_data_line = False
                continue
            first_data_line = False
            fields = line.split("\t")
            if len(fields) != 2:
                raise DataError(f"{path}:{lineno}: expected 'src<TAB>dst', got {line!r}")
            try:
                i, j = int(fields[0]), int(fields[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer endpoint in {line!r}") from None
            if i < 0 or j < 0:
                raise DataError(f"{path}:{lineno}: negative index in {line!r}")
            if n_declared is not None and (i >= n_declared or j >= n_declared):
                raise DataError(
                    f"{path}:{lineno}: index ({i}, {j}) out of range for n={n_declared}"
                )
            pairs.append((i, j))
            linenos.append(lineno)
    if n_declared is None:
        n_declared = 1 + max((max(p) for p in pairs), default=-1)
        if n_declared == 0:
            raise DataError(f"{path}: empty edge list and no n=<count> header")
    return load_graph(pairs, n_declared)


def write_edge_list(graph: Graph, path) -> None:
    """Write the canonical edge-list file for ``graph`` (n= header, each
    undirected edge once as i<j, sorted)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"n={graph.n}\n")
        for i, j in graph.edges:
            fh.write(f"{i}\t{j}\n")


def normalized_laplacian(g: Graph, allow_isolated: bool = False) -> sp.csr_array:
    """Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2} in CSR form.

    Diagonal entries are 1, off-diagonals -1/sqrt(d_i * d_j) per edge;
    nnz = 2|edges| + n. Isolated nodes are an error unless
    ``allow_isolated`` is set, in which case they keep diagonal 1 and no
    off-diagonals (spectrally inert) rather than producing 1/sqrt(0).

    Entry (i, j) and (j, i) are computed from the identical float product
    d_i * d_j, so the output is symmetric to bit equality.
    """
    deg = g.degrees()
    if not allow_isolated:
        isolated = np.flatnonzero(deg == 0)
        if isolated.size:
            raise DataError(
                f"isolated node {int(isolated[0])} (degree 0); drop it, connect it, "
                "or pass allow_isolated=True"
            )
    m = g.num_edges
    rows = np.empty(2 * m + g.n, dtype=np.int64)
    cols = np.empty_like(rows)
    vals = np.empty(2 * m + g.n, dtype=np.float64)
    if m:
        i, j = g.edges[:, 0], g.edges[:, 1]
        off = -1.0 / np.sqrt(deg[i].astype(np.float64) * deg[j].astype(np.float64))
        rows[:m], cols[:m], vals[:m] = i, j, off
        rows[m:2 * m], cols[m:2 * m], vals[m:2 * m] = j, i, off
    rows[2 * m:] = np.arange(g.n)
    cols[2 * m:] = np.arange(g.n)
    vals[2 * m:] = 1.0
    lap = sp.csr_array((vals, (rows, cols)), shape=(g.n, g.n))
    lap.sort_indices()
    return lap


def spmm(a: sp.csr_array, b: np.ndarray) -> np.ndarray:
    """Exact CSR x dense product. Result is independent of any internal
    parallelism (scipy's kernel accumulates each row in index order)."""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 1:
        b = b[:, None]
        squeeze = True
    else:
        squeeze = False
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    out = a @ b
    return out[:, 0] if squeeze else out


# ----------------------------------------------------------------------
# Synthetic graphs (test fixtures and benchmarks)

def grid_graph(rows: int, cols: int) -> Graph:
    """rows x cols lattice; node (r, c) is index r*cols + c."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return load_graph(edges, rows * cols)


def preferential_attachment_graph(n: int, m: int, seed: int = 0) -> Graph:
    """Preferential attachment: each new node attaches to m distinct
    existing nodes sampled proportionally to degree. Deterministic given
    the seed. |edges| = m * (n - m)."""
    if not (1 <= m < n):
        raise ValueError("need 1 <= m < n")
    rng = np.random.default_rng(seed)
    edges = []
    repeated = list(range(m))  # seed nodes, degree-0 but samplable once
    for v in range(m, n):
        targets = set()
        while len(targets) < m:
            pick = repeated[rng.integers(len(repeated))]
            targets.add(pick)
        for t in sorted(targets):
            edges.append((t, v))
            repeated.append(t)
        repeated.extend([v] * m)
    return load_graph(edges, n)


def random_connected_graph(n: int, extra_edges: int = 0, seed: int = 0) -> Graph:
    """Uniform random spanning tree skeleton plus ``extra_edges`` random
    non-duplicate edges; connected, no isolated nodes."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        j = int(rng.integers(k))
        a, b = int(order[k]), int(order[j])
        edges.add((min(a, b), max(a, b)))
    attempts = 0
    while len(edges) < (n - 1) + extra_edges and attempts < 100 * (extra_edges + 1):
        a, b = int(rng.integers(n)), int(rng.integers(n))
        attempts += 1
        if a == b:
            continue
        edges.add((min(a, b), max(a, b)))
    return load_graph(sorted(edges), n)
