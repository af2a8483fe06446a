"""Sparsity and interpretability measurements on transform matrices.

Density here always means stored-entry count over matrix size; bases are
thresholded upstream, so stored entries are exactly the surviving ones.
Every report embeds the kernel convention and (s, t, m) so its numbers can
be reproduced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, normalized_laplacian
from .spectral import EigenSystem, SpectralBasis

__all__ = [
    "matrix_density",
    "projected_signal_stats",
    "top_active_bases",
    "SparsityReport",
    "sparsity_report",
]


def matrix_density(m) -> tuple[float, int]:
    """(stored-entry density, stored-entry count)."""
    if sp.issparse(m):
        nnz = int(m.nnz)
    else:
        nnz = int(np.count_nonzero(m))
    rows, cols = m.shape
    return nnz / (rows * cols), nnz


def _project_column(transform, X, feature_index: int) -> np.ndarray:
    n, p = X.shape
    if not 0 <= feature_index < p:
        raise IndexError(f"feature {feature_index} out of range [0, {p})")
    col = X[:, [feature_index]]
    col = col.toarray().ravel() if sp.issparse(col) else np.asarray(col).ravel()
    if isinstance(transform, SpectralBasis):
        return transform.psi_inv @ col
    if isinstance(transform, EigenSystem):
        return transform.U.T @ col
    raise TypeError("transform must be a SpectralBasis or EigenSystem")


def projected_signal_stats(
    transform, X, feature_index: int, t_signal: float = 0.0
) -> tuple[int, float, np.ndarray]:
    """Project one feature column (psi_inv for a wavelet basis, U^T for an
    eigensystem) and count entries with |v| > t_signal.

    The default t_signal=0 counts strict nonzeros, which for the sparse
    path is the stored-nonzero count of the product.
    """
    v = _project_column(transform, X, feature_index)
    nnz = int(np.count_nonzero(np.abs(v) > t_signal))
    return nnz, nnz / v.shape[0], v


def top_active_bases(
    basis: SpectralBasis, X, feature_index: int, k: int
) -> list[tuple[int, float]]:
    """The k bases with the largest projected values of the feature column,
    descending; ties resolve to the lower node index."""
    n = basis.n
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    v = _project_column(basis, X, feature_index)
    order = np.lexsort((np.arange(n), -v))
    return [(int(i), float(v[i])) for i in order[:k]]


@dataclass(frozen=True)
class SparsityReport:
    """Density/nnz rows plus the basis settings they were measured under."""

    rows: list
    s: float
    t: float
    method: str
    order: int | None
    convention: str

    def to_tsv(self) -> str:
        lines = [self._meta_line(), "matrix\tdensity\tnnz"]
        for name, density, nnz in self.rows:
            lines.append(f"{name}\t{density:.6g}\t{nnz}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        width = max(len(name) for name, _, _ in self.rows)
        lines = [self._meta_line()]
        for name, density, nnz in self.rows:
            lines.append(f"{name:<{width}}  density {100 * density:8.4f}%  nnz {nnz}")
        return "\n".join(lines) + "\n"

    def _meta_line(self) -> str:
        m = "-" if self.order is None else str(self.order)
        return (f"# method={self.method} s={self.s} t={self.t} m={m} "
                f"convention=\"{self.convention}\"")


def sparsity_report(
    graph: Graph,
    basis: SpectralBasis,
    eigensystem: EigenSystem | None = None,
    allow_isolated: bool = False,
) -> SparsityReport:
    """Densities and stored-entry counts for the thresholded pair, the
    Fourier matrix (when an eigensystem is supplied), and the Laplacian
    (off-diagonal-only and full counts both reported)."""
    rows = []
    for name, m in (("psi", basis.psi), ("psi_inv", basis.psi_inv)):
        density, nnz = matrix_density(m)
        rows.append((name, density, nnz))
    if eigensystem is not None:
        density, nnz = matrix_density(eigensystem.U.T)
        rows.append(("U_T", density, nnz))
    lap = normalized_laplacian(graph, allow_isolated=allow_isolated)
    full_nnz = int(lap.nnz)
    diag_nnz = int(np.count_nonzero(lap.diagonal()))
    off = full_nnz - diag_nnz
    n = graph.n
    rows.append(("laplacian_offdiag", off / (n * n), off))
    rows.append(("laplacian_full", full_nnz / (n * n), full_nnz))
    return SparsityReport(
        rows=rows,
        s=basis.s,
        t=basis.t,
        method=basis.method,
        order=basis.order,
        convention=basis.convention,
    )
