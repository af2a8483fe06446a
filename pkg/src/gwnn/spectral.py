"""Exact spectral transforms: Laplacian eigensystem, graph Fourier
transform/convolution, and the exponential-kernel wavelet basis built from a
full eigendecomposition.

This is the ground-truth path. It costs O(n^3) and is capped at modest n;
the fast polynomial path in :mod:`gwnn.chebyshev` is validated against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DataError, NumericalError
from .graphs import sparsify
from .serialize import savez_deterministic

__all__ = [
    "EigenSystem",
    "SpectralBasis",
    "eigendecompose",
    "fourier_transform",
    "inverse_fourier_transform",
    "fourier_convolution",
    "wavelet_basis_exact",
    "wavelet_convolution",
    "save_basis",
    "load_basis",
]

DEFAULT_EIG_CAP = 5000

BASIS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class EigenSystem:
    """Orthonormal eigenvectors (columns of U) and ascending eigenvalues of a
    symmetric matrix."""

    U: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.lam.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """A matched wavelet-basis pair (psi, psi_inv) at scale ``s``, thresholded
    at ``t``, stored sparse.

    Default kernel convention: psi = exp(+s L), psi_inv = exp(-s L) (the heat
    kernel, the sparse/localized side). ``swap_kernel=True`` exchanges the
    two. ``method`` is "exact" or "chebyshev"; ``order`` is the truncation
    order for the chebyshev method, None otherwise.
    """

    psi: sp.csr_array
    psi_inv: sp.csr_array
    s: float
    t: float
    method: str
    order: int | None = None
    swap_kernel: bool = False

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def convention(self) -> str:
        if self.swap_kernel:
            return "psi=exp(-sL), psi_inv=exp(+sL)"
        return "psi=exp(+sL), psi_inv=exp(-sL)"

    def describe(self) -> str:
        tag = self.method if self.order is None else f"{self.method}(m={self.order})"
        return f"{tag}, s={self.s}, t={self.t}, {self.convention}"


def eigendecompose(l: sp.csr_array, max_n: int = DEFAULT_EIG_CAP) -> EigenSystem:
    """Dense symmetric eigendecomposition of a sparse matrix.

    O(n^3); refuses n > max_n. The input must be symmetric (checked), and
    the returned eigenvalues are ascending.
    """
    n = l.shape[0]
    if l.shape[0] != l.shape[1]:
        raise ValueError(f"matrix is {l.shape}, expected square")
    if n > max_n:
        raise ValueError(
            f"n={n} exceeds the dense-eigendecomposition cap {max_n}; "
            "raise max_n explicitly or use the chebyshev path"
        )
    dense = l.toarray() if sp.issparse(l) else np.asarray(l, dtype=np.float64)
    asym = np.max(np.abs(dense - dense.T)) if n else 0.0
    scale = max(1.0, np.max(np.abs(dense))) if n else 1.0
    if asym > 1e-12 * scale:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    try:
        lam, U = scipy.linalg.eigh(dense)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed to converge: {exc}") from exc
    return EigenSystem(U=np.ascontiguousarray(U), lam=lam)


def _check_len(name: str, v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"{name} has shape {v.shape}, expected ({n},)")
    return v


def fourier_transform(es: EigenSystem, x: np.ndarray) -> np.ndarray:
    """Project a vertex-domain signal onto the eigenvector basis: U^T x."""
    x = _check_len("x", x, es.n)
    return es.U.T @ x


def inverse_fourier_transform(es: EigenSystem, xhat: np.ndarray) -> np.ndarray:
    """Back-project spectral coefficients: U xhat."""
    xhat = _check_len("xhat", xhat, es.n)
    return es.U @ xhat


def fourier_convolution(es: EigenSystem, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Spectral convolution U((U^T y) * (U^T x)); commutative in x and y."""
    x = _check_len("x", x, es.n)
    y = _check_len("y", y, es.n)
    return es.U @ ((es.U.T @ y) * (es.U.T @ x))


def wavelet_basis_exact(
    es: EigenSystem, s: float, t: float, swap_kernel: bool = False
) -> SpectralBasis:
    """Exact wavelet pair from the eigensystem.

    psi     = U diag(exp(+s lam)) U^T
    psi_inv = U diag(exp(-s lam)) U^T   (heat kernel)

    each independently thresholded at ``t`` after full construction
    (entries with |value| < t dropped). ``swap_kernel`` exchanges the two
    exponents. With t=0 the pair multiplies to the identity up to rounding.
    """
    if s < 0:
        raise ValueError("scale s must be >= 0")
    if t < 0:
        raise ValueError("threshold t must be >= 0")
    grow = np.exp(s * es.lam)
    decay = np.exp(-s * es.lam)
    if swap_kernel:
        grow, decay = decay, grow
    psi = (es.U * grow) @ es.U.T
    psi_inv = (es.U * decay) @ es.U.T
    return SpectralBasis(
        psi=sparsify(psi, t),
        psi_inv=sparsify(psi_inv, t),
        s=float(s),
        t=float(t),
        method="exact",
        order=None,
        swap_kernel=swap_kernel,
    )


def wavelet_convolution(b: SpectralBasis, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Wavelet-domain convolution psi((psi_inv y) * (psi_inv x))."""
    n = b.n
    x = _check_len("x", x, n)
    y = _check_len("y", y, n)
    return b.psi @ ((b.psi_inv @ y) * (b.psi_inv @ x))


# ----------------------------------------------------------------------
# Basis cache file
#
# Single .npz container (numpy's documented zip-of-arrays format), stable
# across versions:
#   version, n, s, t, order (-1 for exact), swap_kernel (0/1),
#   psi_indptr/psi_indices/psi_data, inv_indptr/inv_indices/inv_data

def save_basis(basis: SpectralBasis, path) -> None:
    """Persist a basis pair so training runs can reuse it. Byte-identical
    for identical bases (deterministic container)."""
    savez_deterministic(
        Path(path),
        version=np.int64(BASIS_FORMAT_VERSION),
        n=np.int64(basis.n),
        s=np.float64(basis.s),
        t=np.float64(basis.t),
        order=np.int64(-1 if basis.order is None else basis.order),
        swap_kernel=np.int64(1 if basis.swap_kernel else 0),
        psi_indptr=basis.psi.indptr,
        psi_indices=basis.psi.indices,
        psi_data=basis.psi.data,
        inv_indptr=basis.psi_inv.indptr,
        inv_indices=basis.psi_inv.indices,
        inv_data=basis.psi_inv.data,
    )


def load_basis(path) -> SpectralBasis:
    """Load a basis pair written by :func:`save_basis`."""
    with np.load(Path(path)) as d:
        version = int(d["version"])
        if version != BASIS_FORMAT_VERSION:
            raise DataError(
                f"basis cache {path}: format version {version} not supported"
            )
        n = int(d["n"])
        order = int(d["order"])
        psi = sp.csr_array(
            (d["psi_data"], d["psi_indices"], d["psi_indptr"]), shape=(n, n)
        )
        psi_inv = sp.csr_array(
            (d["inv_data"], d["inv_indices"], d["inv_indptr"]), shape=(n, n)
        )
        return SpectralBasis(
            psi=psi,
            psi_inv=psi_inv,
            s=float(d["s"]),
            t=float(d["t"]),
            method="exact" if order < 0 else "chebyshev",
            order=None if order < 0 else order,
            swap_kernel=bool(int(d["swap_kernel"])),
        )
