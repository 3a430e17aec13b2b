"""Minimal SVG scatter emitter: circles plus a frame, no plotting dependency."""

from __future__ import annotations

from pathlib import Path

import numpy as np

PALETTE = (
    "#4c72b0",
    "#dd8452",
    "#55a868",
    "#c44e52",
    "#8172b3",
    "#937860",
    "#da8bc3",
    "#8c8c8c",
    "#ccb974",
    "#64b5cd",
)


def svg_scatter(
    points: np.ndarray,
    labels: np.ndarray | None,
    path,
    size: int = 480,
    margin: int = 40,
    radius: float = 3.0,
) -> None:
    """Write a 2-d scatter as standalone SVG, one circle per point."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))[:, :2]
    n = pts.shape[0]
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    inner = size - 2 * margin
    xs = margin + (pts[:, 0] - lo[0]) / span[0] * inner
    # SVG y axis grows downward
    ys = size - margin - (pts[:, 1] - lo[1]) / span[1] * inner

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{inner}" height="{inner}" '
        'fill="none" stroke="#888" stroke-width="1"/>',
    ]
    for (x, y), lab in zip(zip(xs, ys), labels):
        color = PALETTE[int(lab) % len(PALETTE)]
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" '
            f'fill="{color}" fill-opacity="0.8"/>'
        )
    for txt, x, y, anchor in (
        (f"{lo[0]:.3g}", margin, size - margin + 14, "middle"),
        (f"{hi[0]:.3g}", size - margin, size - margin + 14, "middle"),
        (f"{lo[1]:.3g}", margin - 6, size - margin, "end"),
        (f"{hi[1]:.3g}", margin - 6, margin + 4, "end"),
    ):
        parts.append(
            f'<text x="{x}" y="{y}" font-size="10" text-anchor="{anchor}" '
            f'fill="#444">{txt}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
