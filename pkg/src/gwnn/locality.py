"""Vertex-domain locality of wavelet convolution.

The convolution with a length-n parameter vector theta is
psi diag(theta) psi_inv, a sum of rank-one terms theta_k psi[:,k] times
row k of psi_inv. Its support matrix H = psi psi_inv collapses to the
identity for an exact unthresholded pair, so everything interesting here
is measured on thresholded (or polynomial-approximated) bases: how far a
column's mass spreads, and how that spread grows with the scale s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, csr_clean
from .spectral import SpectralBasis

__all__ = [
    "theta_convolution",
    "convolution_support",
    "LocalityProfile",
    "locality_profile",
    "bfs_hops",
]


def theta_convolution(
    basis: SpectralBasis, theta: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """psi . diag(theta) . psi_inv . x, for a single signal or a column
    stack of them."""
    n = basis.n
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if theta.shape != (n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({n},)")
    if x.ndim not in (1, 2) or x.shape[0] != n:
        raise ValueError(f"x has shape {x.shape}, expected ({n},) or ({n}, k)")
    scaled = theta * (basis.psi_inv @ x) if x.ndim == 1 \
        else theta[:, None] * (basis.psi_inv @ x)
    return basis.psi @ scaled


def convolution_support(basis: SpectralBasis) -> sp.csr_array:
    """H = psi psi_inv, stored sparse with computed zeros dropped.

    Meaningful for thresholded pairs; with t=0 and an exact basis this is
    the identity up to rounding.
    """
    return csr_clean(basis.psi @ basis.psi_inv)


def bfs_hops(graph: Graph, source: int) -> np.ndarray:
    """Hop distance from source to every node; -1 for unreachable."""
    n = graph.n
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range [0, {n})")
    adj = graph.adjacency
    hops = np.full(n, -1, dtype=np.int64)
    hops[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            nbrs = adj.indices[adj.indptr[u]:adj.indptr[u + 1]]
            for v in nbrs:
                if hops[v] < 0:
                    hops[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return hops


@dataclass(frozen=True)
class LocalityProfile:
    """Absolute mass of one psi_inv column binned by hop distance from its
    node, plus any mass sitting on unreachable nodes."""

    node: int
    hop_mass: np.ndarray
    unreachable_mass: float

    @property
    def total(self) -> float:
        return float(self.hop_mass.sum() + self.unreachable_mass)

    @property
    def normalized(self) -> np.ndarray:
        t = self.total
        if t == 0.0:
            return np.zeros_like(self.hop_mass)
        return self.hop_mass / t

    def mass_beyond(self, hop: int) -> float:
        """Normalized mass strictly past ``hop`` (unreachable included)."""
        t = self.total
        if t == 0.0:
            return 0.0
        tail = float(self.hop_mass[hop + 1:].sum()) + self.unreachable_mass
        return tail / t

    def to_tsv(self) -> str:
        lines = [f"# node={self.node} unreachable_mass={self.unreachable_mass!r}",
                 "hop\tmass\tnormalized"]
        norm = self.normalized
        for h, (m, f) in enumerate(zip(self.hop_mass, norm)):
            lines.append(f"{h}\t{float(m)!r}\t{float(f)!r}")
        return "\n".join(lines) + "\n"


def locality_profile(graph: Graph, basis: SpectralBasis, node: int) -> LocalityProfile:
    """Bin |psi_inv[:, node]| by BFS hop distance from the node."""
    n = basis.n
    if graph.n != n:
        raise ValueError(f"graph has n={graph.n}, basis has n={n}")
    if not 0 <= node < n:
        raise IndexError(f"node {node} out of range [0, {n})")
    col = np.abs(basis.psi_inv[:, [node]].toarray().ravel())
    hops = bfs_hops(graph, node)
    reachable = hops >= 0
    max_hop = int(hops[reachable].max())
    mass = np.zeros(max_hop + 1)
    np.add.at(mass, hops[reachable], col[reachable])
    unreachable = float(col[~reachable].sum())
    return LocalityProfile(node=node, hop_mass=mass, unreachable_mass=unreachable)
