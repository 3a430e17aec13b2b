"""Graph Laplacians, their quadratic form, spectral layout, and normalized cut.

For a symmetric weight matrix W with degrees d_i = sum_j W_ij, the
combinatorial Laplacian is L = D - W and the normalized Laplacian is
Lnorm = D^{-1/2} L D^{-1/2}. The central identity

    tr(Z^T L Z) = 1/2 * sum_ij W_ij ||Z_i - Z_j||^2

lets the quadratic form be evaluated as a sum over stored edges, which is
how ``laplacian_quadratic`` computes it; the dense matrix product is kept
only as an independent cross-check in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConfigurationError, GraphStructureError
from .fuzzy import SimilarityGraph

# eigenvalues at or below this are treated as the zero eigenspace
NULL_SPACE_TOL = 1e-8


@dataclass(frozen=True)
class LaplacianPair:
    """Degrees plus the combinatorial and normalized Laplacians of a graph."""

    degree: np.ndarray
    combinatorial: sp.csr_matrix
    normalized: sp.csr_matrix


def build_laplacians(V: SimilarityGraph) -> LaplacianPair:
    """Compute L = D - V and Lnorm = D^{-1/2} L D^{-1/2}; rejects isolated vertices."""
    deg = V.degrees()
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise GraphStructureError(
            f"vertex {bad[0]} is isolated (degree 0); normalized Laplacian undefined"
        )
    n = V.n
    D = sp.diags(deg)
    L = (D - V.matrix).tocsr()
    inv_sqrt = sp.diags(1.0 / np.sqrt(deg))
    Lnorm = (inv_sqrt @ L @ inv_sqrt).tocsr()
    return LaplacianPair(degree=deg, combinatorial=L, normalized=Lnorm)


def laplacian_quadratic(V: SimilarityGraph, Z: np.ndarray) -> float:
    """tr(Z^T L(V) Z) evaluated as the half-sum of w_ij ||Z_i - Z_j||^2 over edges."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if Z.shape[0] != V.n:
        raise ConfigurationError(
            f"Z has {Z.shape[0]} rows but the graph has {V.n} vertices"
        )
    coo = V.matrix.tocoo()
    diff = Z[coo.row] - Z[coo.col]
    sq = np.einsum("ij,ij->i", diff, diff)
    return 0.5 * float(coo.data @ sq)


@dataclass(frozen=True)
class SpectralSolution:
    """Selected eigenvectors of the normalized Laplacian.

    ``vectors`` holds orthonormal eigenvector columns for the ``values``
    (ascending) strictly above the zero eigenspace; ``n_null`` is the
    dimension of the discarded zero eigenspace, which equals the number of
    connected components.
    """

    vectors: np.ndarray
    values: np.ndarray
    n_null: int

    def save_csv(self, path) -> None:
        lines = [",".join(repr(float(v)) for v in row) for row in self.vectors]
        Path(path).write_text("\n".join(lines) + "\n")


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (first on ties)."""
    out = vecs.copy()
    for c in range(out.shape[1]):
        lead = np.argmax(np.abs(out[:, c]))
        if out[lead, c] < 0:
            out[:, c] = -out[:, c]
    return out


def spectral_init(V: SimilarityGraph, d: int) -> SpectralSolution:
    """Eigenvectors of Lnorm for the d smallest eigenvalues above the zero space."""
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    pair = build_laplacians(V)
    vals, vecs = scipy.linalg.eigh(pair.normalized.toarray())
    n_null = int(np.sum(vals <= NULL_SPACE_TOL))
    if d + n_null > V.n:
        raise ConfigurationError(
            f"d={d} eigenvectors requested but only {V.n - n_null} non-null available"
        )
    sel = slice(n_null, n_null + d)
    return SpectralSolution(
        vectors=_fix_signs(vecs[:, sel]), values=vals[sel].copy(), n_null=n_null
    )


@dataclass(frozen=True)
class Partition:
    """Binary vertex assignment defining the two-sided cut (S, complement)."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=bool)
        object.__setattr__(self, "assignment", a)


def ncut(V: SimilarityGraph, p: Partition) -> float:
    """Normalized cut cut(S,Sc)/vol(S) + cut(S,Sc)/vol(Sc) of a 2-way partition."""
    side = p.assignment
    if side.shape != (V.n,):
        raise ConfigurationError("partition must assign every vertex")
    if side.all() or not side.any():
        raise ConfigurationError("both sides of the partition must be nonempty")
    deg = V.degrees()
    vol_s = float(deg[side].sum())
    vol_c = float(deg[~side].sum())
    if vol_s <= 0 or vol_c <= 0:
        raise GraphStructureError("both sides must have positive volume")
    cut = float(V.matrix[side][:, ~side].sum())
    return cut / vol_s + cut / vol_c


@dataclass(frozen=True)
class RelaxationReport:
    """Agreement between the (L, D) generalized and Lnorm ordinary eigenproblems."""

    values_generalized: np.ndarray
    values_normalized: np.ndarray
    max_value_gap: float
    max_principal_angle: float


def ncut_relaxation_check(V: SimilarityGraph, d: int) -> RelaxationReport:
    """Verify that generalized eigenvectors of (L, D) map onto Lnorm's under
    u -> D^{1/2} u, comparing eigenvalue lists and subspace principal angles."""
    n_comp, _ = connected_components(V.matrix, directed=False)
    if n_comp != 1:
        raise GraphStructureError(
            f"relaxation check requires a connected graph, found {n_comp} components"
        )
    pair = build_laplacians(V)
    L = pair.combinatorial.toarray()
    D = np.diag(pair.degree)

    gvals, gvecs = scipy.linalg.eigh(L, D)
    nvals, nvecs = scipy.linalg.eigh(pair.normalized.toarray())

    gn = int(np.sum(gvals <= NULL_SPACE_TOL))
    nn = int(np.sum(nvals <= NULL_SPACE_TOL))
    g_sel = gvals[gn : gn + d]
    n_sel = nvals[nn : nn + d]

    mapped = np.sqrt(pair.degree)[:, None] * gvecs[:, gn : gn + d]
    angles = scipy.linalg.subspace_angles(mapped, nvecs[:, nn : nn + d])
    return RelaxationReport(
        values_generalized=g_sel,
        values_normalized=n_sel,
        max_value_gap=float(np.abs(g_sel - n_sel).max()),
        max_principal_angle=float(angles.max()) if angles.size else 0.0,
    )


def random_orthonormal_frame(
    n: int, d: int, rng: np.random.Generator, complement: np.ndarray | None = None
) -> np.ndarray:
    """Random n x d orthonormal frame, optionally orthogonal to given columns."""
    G = rng.standard_normal((n, d))
    if complement is not None:
        G = G - complement @ (complement.T @ G)
    Q, _ = np.linalg.qr(G)
    return Q


def count_components(V: SimilarityGraph) -> int:
    n_comp, _ = connected_components(V.matrix, directed=False)
    return int(n_comp)
