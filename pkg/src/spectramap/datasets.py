"""Synthetic point-cloud generators and CSV ingestion.

Generators are pure functions of their arguments including the seed; the
normal variates come from numpy's PCG64 generator with the ziggurat
algorithm, so fixtures are stable within this implementation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError


@dataclass(frozen=True)
class DataMatrix:
    """n points in an ambient real space, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ConfigurationError("points must be a 2-d array (n rows x D columns)")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ConfigurationError("need at least one point and one dimension")
        if not np.all(np.isfinite(pts)):
            raise ConfigurationError("coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """A DataMatrix plus integer class ids used only for evaluation/plotting."""

    data: DataMatrix
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.data.n,):
            raise ConfigurationError("labels must be one integer per point")
        object.__setattr__(self, "labels", labels)


def gen_blobs(n_per_cluster: int, centers, std: float, seed: int) -> LabeledDataset:
    """Isotropic Gaussian clusters, ``n_per_cluster`` samples around each center."""
    if n_per_cluster < 1:
        raise ConfigurationError("n_per_cluster must be >= 1")
    if std <= 0:
        raise ConfigurationError("std must be positive")
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.size == 0:
        raise ConfigurationError("need at least one center")

    rng = np.random.default_rng(seed)
    blocks = []
    labels = []
    for idx, center in enumerate(centers):
        pts = center + std * rng.standard_normal((n_per_cluster, centers.shape[1]))
        blocks.append(pts)
        labels.append(np.full(n_per_cluster, idx, dtype=np.int64))
    return LabeledDataset(DataMatrix(np.vstack(blocks)), np.concatenate(labels))


def gen_two_moons(n: int, noise: float, seed: int) -> LabeledDataset:
    """Two interleaved unit-radius half-circles with isotropic Gaussian noise.

    The first moon is the upper half of the circle centered at the origin,
    the second the lower half of the circle centered at (1, 0.5).
    """
    if n < 2:
        raise ConfigurationError("need n >= 2")
    if noise < 0:
        raise ConfigurationError("noise must be nonnegative")

    n_outer = n // 2
    n_inner = n - n_outer
    t_out = np.linspace(0.0, np.pi, n_outer)
    t_in = np.linspace(0.0, np.pi, n_inner)
    pts = np.concatenate(
        [
            np.column_stack([np.cos(t_out), np.sin(t_out)]),
            np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)]),
        ]
    )
    if noise > 0:
        rng = np.random.default_rng(seed)
        pts = pts + noise * rng.standard_normal(pts.shape)
    labels = np.concatenate(
        [np.zeros(n_outer, dtype=np.int64), np.ones(n_inner, dtype=np.int64)]
    )
    return LabeledDataset(DataMatrix(pts), labels)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_csv(path, has_labels: bool = False) -> LabeledDataset:
    """Load a rectangular numeric CSV, optionally with a final integer label column.

    A header row is auto-detected when the first row contains any non-numeric
    cell. Rows and columns in error messages are 1-based file positions.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        raw = [row for row in csv.reader(fh)]
    raw = [row for row in raw if row and any(cell.strip() for cell in row)]
    if not raw:
        raise ParseError(f"{path}: empty file")

    start = 0
    if any(not _is_number(cell) for cell in raw[0]):
        start = 1  # header row

    width = len(raw[start]) if start < len(raw) else 0
    rows = []
    labels = []
    for r in range(start, len(raw)):
        row = raw[r]
        line_no = r + 1
        if len(row) != width:
            raise ParseError(
                f"{path}: row {line_no} has {len(row)} fields, expected {width}"
            )
        values = []
        for c, cell in enumerate(row):
            cell = cell.strip()
            if not _is_number(cell):
                raise ParseError(
                    f"{path}: row {line_no}, column {c + 1}: not a number: {cell!r}"
                )
            values.append(float(cell))
        if has_labels:
            lab = values[-1]
            if lab != int(lab):
                raise ParseError(
                    f"{path}: row {line_no}, column {width}: label must be an integer"
                )
            labels.append(int(lab))
            values = values[:-1]
        rows.append(values)

    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {len(rows)}")
    if has_labels and width < 2:
        raise ParseError(f"{path}: label column requested but only {width} column(s)")

    data = DataMatrix(np.asarray(rows, dtype=np.float64))
    label_arr = (
        np.asarray(labels, dtype=np.int64)
        if has_labels
        else np.zeros(data.n, dtype=np.int64)
    )
    return LabeledDataset(data, label_arr)


def save_csv(dataset: LabeledDataset, path, with_labels: bool = True) -> None:
    """Write a dataset as CSV with a header; floats use shortest exact repr."""
    path = Path(path)
    dim = dataset.data.dim
    header = [f"x{i}" for i in range(dim)]
    if with_labels:
        header.append("label")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.data.n):
            row = [repr(float(v)) for v in dataset.data.points[i]]
            if with_labels:
                row.append(str(int(dataset.labels[i])))
            writer.writerow(row)
