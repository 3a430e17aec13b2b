"""Full-batch embedding losses and their structural decompositions.

The cross-entropy objective over all ordered vertex pairs i != j is

    total = attract + repel
    attract = -sum v_ij * log phi(s_ij)
    repel   = -sum (1 - v_ij) * log(1 - phi(s_ij))

with s_ij the squared embedding distance. For the Gaussian kernel the
attraction equals (1/tau) * tr(Y^T L Y) identically; for the heavy-tailed
kernel with b = 1 it equals 2a * tr(Y^T L Y) up to a curvature error whose
bound ``taylor_error_bound`` computes. ``expected_sgd_loss`` is the per-epoch
expectation of the negative-sampling estimator: positives weighted by v_ab,
negatives uniform over vertices with the degree-weighted prefactor n_neg/n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .fuzzy import SimilarityGraph
from .kernels import KernelParams, one_minus_phi, phi
from .spectra import laplacian_quadratic

LOG_CLAMP = 1e-12


def pairwise_sq_dists(Y: np.ndarray) -> np.ndarray:
    """Dense n x n matrix of squared distances.

    Accumulates one coordinate at a time so every entry is the same
    elementary sum a scalar evaluation would produce; the result is exactly
    symmetric and zero on the diagonal.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    n = Y.shape[0]
    out = np.zeros((n, n))
    for t in range(Y.shape[1]):
        col = Y[:, t]
        out += (col[:, None] - col[None, :]) ** 2
    return out


def _clamped_log(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, LOG_CLAMP))


@dataclass(frozen=True)
class LossReport:
    """Loss decomposition for one embedding state.

    ``laplacian_form`` is c * tr(Y^T L Y) with c = 1/tau (gaussian) or 2a
    (cauchy with b = 1) and is None for kernel shapes where no quadratic
    form corresponds to the attraction; ``taylor_bound`` likewise exists
    only for the cauchy b = 1 case.
    """

    total: float
    attract: float
    repel: float
    laplacian_form: float | None
    taylor_bound: float | None
    per_edge_terms: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "attract": self.attract,
            "repel": self.repel,
            "laplacian_form": self.laplacian_form,
            "taylor_bound": self.taylor_bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def attractive_term(V: SimilarityGraph, Y: np.ndarray, p: KernelParams) -> float:
    """-sum_{i != j} v_ij log phi(s_ij) over stored edges, clamped logs."""
    coo = V.matrix.tocoo()
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    diff = Y[coo.row] - Y[coo.col]
    s = np.einsum("ij,ij->i", diff, diff)
    return -float(coo.data @ _clamped_log(phi(s, p)))


class LaplacianComparison(NamedTuple):
    attract: float
    laplacian_form: float
    gap: float


def _laplacian_constant(p: KernelParams) -> float | None:
    if p.family == "gaussian":
        return 1.0 / p.tau
    if p.b == 1.0:
        return 2.0 * p.a
    return None


def laplacian_comparison(
    V: SimilarityGraph, Y: np.ndarray, p: KernelParams
) -> LaplacianComparison:
    """Attraction next to its quadratic-form counterpart c * tr(Y^T L Y).

    The two numbers come from independent code paths: the attraction sums
    clamped kernel logs edge by edge, the quadratic form sums weighted
    squared edge lengths.
    """
    c = _laplacian_constant(p)
    if c is None:
        raise ConfigurationError(
            "no quadratic form corresponds to the cauchy kernel with b != 1"
        )
    att = attractive_term(V, Y, p)
    lap = c * laplacian_quadratic(V, Y)
    return LaplacianComparison(attract=att, laplacian_form=lap, gap=abs(att - lap))


def taylor_error_bound(V: SimilarityGraph, Y: np.ndarray, a: float) -> float:
    """(a^2 / 2) * sum_{i != j} v_ij ||y_i - y_j||^4 over ordered pairs."""
    coo = V.matrix.tocoo()
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    diff = Y[coo.row] - Y[coo.col]
    s = np.einsum("ij,ij->i", diff, diff)
    return 0.5 * a * a * float(coo.data @ (s * s))


def cross_entropy_loss(
    V: SimilarityGraph, Y: np.ndarray, p: KernelParams, per_edge: bool = False
) -> LossReport:
    """Full cross-entropy over all ordered pairs, with its decomposition."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    n = V.n
    if Y.shape[0] != n:
        raise ConfigurationError(f"Y has {Y.shape[0]} rows, graph has {n} vertices")

    S = pairwise_sq_dists(Y)
    off = ~np.eye(n, dtype=bool)
    Vd = V.matrix.toarray()
    log_p = _clamped_log(phi(S, p))
    log_q = _clamped_log(one_minus_phi(S, p))
    attract = -float((Vd * log_p)[off].sum())
    repel = -float(((1.0 - Vd) * log_q)[off].sum())

    c = _laplacian_constant(p)
    lap = c * laplacian_quadratic(V, Y) if c is not None else None
    bound = (
        taylor_error_bound(V, Y, p.a)
        if p.family == "cauchy_ab" and p.b == 1.0
        else None
    )

    edges = None
    if per_edge:
        i, j, w = V.edges()
        sq = S[i, j]
        edges = {
            "i": i,
            "j": j,
            "weight": w,
            "sq_dist": sq,
            # both ordered orientations of each undirected edge
            "attract": -2.0 * w * _clamped_log(phi(sq, p)),
            "repel": -2.0 * (1.0 - w) * _clamped_log(one_minus_phi(sq, p)),
        }

    return LossReport(
        total=attract + repel,
        attract=attract,
        repel=repel,
        laplacian_form=lap,
        taylor_bound=bound,
        per_edge_terms=edges,
    )


def expected_sgd_loss(
    V: SimilarityGraph, Y: np.ndarray, p: KernelParams, n_neg: int
) -> float:
    """Expected one-epoch aggregate of the negative-sampling estimator.

    Attraction sums -v_ab log phi over ordered stored edges; repulsion is
    (n_neg / n) * sum_a d_a * sum_{c != a} -log(1 - phi(s_ac)), matching
    uniform negative draws over all vertices with self-draws skipped.
    """
    if n_neg < 0:
        raise ConfigurationError("n_neg must be >= 0")
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    n = V.n
    attract = attractive_term(V, Y, p)
    if n_neg == 0:
        return attract
    S = pairwise_sq_dists(Y)
    log_q = _clamped_log(one_minus_phi(S, p))
    np.fill_diagonal(log_q, 0.0)
    per_anchor = -log_q.sum(axis=1)
    deg = V.degrees()
    repel = (n_neg / n) * float(deg @ per_anchor)
    return attract + repel


def stochastic_step_loss(
    a: int, b: int, negs, Y: np.ndarray, p: KernelParams
) -> float:
    """One negative-sampling event's loss: positive pair (a, b) plus negatives.

    Negative draws equal to the anchor are skipped (a pair with itself has
    no repulsion direction); all logs share the full-loss clamp.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))

    def sq_dist(i, j):
        # same coordinate-at-a-time accumulation as pairwise_sq_dists
        s = 0.0
        for t in range(Y.shape[1]):
            s += (Y[i, t] - Y[j, t]) ** 2
        return s

    loss = -float(np.log(max(phi(sq_dist(a, b), p), LOG_CLAMP)))
    for c in np.atleast_1d(negs):
        if c == a:
            continue
        loss -= float(np.log(max(one_minus_phi(sq_dist(a, c), p), LOG_CLAMP)))
    return loss
