"""Exact k-nearest-neighbor search.

Brute force O(n^2 D) with a deterministic tie rule: neighbors are ordered by
(distance, index), so equal distances resolve to the smaller index. Duplicate
points (zero distance) are legitimate neighbors and are kept; only the query
point itself is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import DataMatrix
from .errors import ConfigurationError


def _euclidean_sq_row(X: np.ndarray, i: int) -> np.ndarray:
    # accumulate one coordinate at a time: an elementary reduction order the
    # test oracle reproduces exactly, so tie handling is bit-identical
    d2 = np.zeros(X.shape[0])
    for t in range(X.shape[1]):
        d2 += (X[:, t] - X[i, t]) ** 2
    return d2


METRICS = {"euclidean": _euclidean_sq_row}


@dataclass(frozen=True)
class KnnGraph:
    """Per-point neighbor ids and distances, each row sorted ascending."""

    indices: np.ndarray
    distances: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.indices.shape[0]


def knn_search(X: DataMatrix, k: int, metric: str = "euclidean") -> KnnGraph:
    """Exact k nearest neighbors of every point under the named metric."""
    if metric not in METRICS:
        raise ConfigurationError(
            f"unknown metric {metric!r}; available: {sorted(METRICS)}"
        )
    n = X.n
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if k >= n:
        raise ConfigurationError(f"k={k} requires at least k+1={k + 1} points, got {n}")

    sq_row = METRICS[metric]
    pts = X.points
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    ids = np.arange(n)
    for i in range(n):
        d2 = sq_row(pts, i)
        d2[i] = np.inf
        order = np.lexsort((ids, d2))[:k]
        indices[i] = order
        distances[i] = np.sqrt(d2[order])
    return KnnGraph(indices=indices, distances=distances, k=k)
