"""Latent-space PCA and plot-data export (CSV + minimal SVG renderings)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class PcaResult:
    components: np.ndarray  # (2, dim) orthonormal rows
    projected: np.ndarray  # (n, 2)
    labels: list
    explained_variance: tuple[float, float]  # variance ratios, non-increasing


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues desc, eigenvectors as columns). Sweeps until the
    off-diagonal Frobenius norm drops below ``tol`` (relative to the matrix
    norm) or ``max_sweeps`` is reached.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ArgumentError(f"matrix must be square, got {a.shape}")
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a**2) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                # hypot avoids overflow in theta**2 for extreme ratios
                t = np.sign(theta) / (abs(theta) + math.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[:, [p, q]] = a[:, [p, q]] @ rot
                v[:, [p, q]] = v[:, [p, q]] @ rot
    vals = np.diag(a).copy()
    order = np.argsort(vals)[::-1]
    return vals[order], v[:, order]


def pca_2d(latents, labels=None) -> PcaResult:
    """Project latent vectors onto their top-2 principal components."""
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ArgumentError("pca_2d needs at least 3 vectors")
    labels = list(labels) if labels is not None else [None] * x.shape[0]
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    vals, vecs = jacobi_eigh(cov)
    comps = vecs[:, :2].T.copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = max(float(np.sum(np.clip(vals, 0.0, None))), 1e-300)
    ratios = (max(vals[0], 0.0) / total, max(vals[1], 0.0) / total)
    return PcaResult(components=comps, projected=centered @ comps.T, labels=labels,
                     explained_variance=ratios)


def export_csv(path, header, rows) -> None:
    """Write rows with a mandatory header row."""
    rows = list(rows)
    if not rows:
        raise ArgumentError("nothing to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _svg_frame(width, height):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">'
    )


def _axes(x_min, x_max, y_min, y_max, width, height, margin):
    """Map data coordinates to pixel coordinates plus tick positions."""
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0

    def to_px(x, y):
        px = margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin)
        py = height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin)
        return px, py

    ticks_x = np.linspace(x_min, x_max, 5)
    ticks_y = np.linspace(y_min, y_max, 5)
    parts = [
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#444"/>'
    ]
    for tx in ticks_x:
        px, _ = to_px(tx, y_min)
        parts.append(f'<line x1="{px:.1f}" y1="{height - margin}" x2="{px:.1f}" '
                     f'y2="{height - margin + 5}" stroke="#444"/>')
        parts.append(f'<text x="{px:.1f}" y="{height - margin + 18}" font-size="11" '
                     f'text-anchor="middle">{tx:.4g}</text>')
    for ty in ticks_y:
        _, py = to_px(x_min, ty)
        parts.append(f'<line x1="{margin - 5}" y1="{py:.1f}" x2="{margin}" '
                     f'y2="{py:.1f}" stroke="#444"/>')
        parts.append(f'<text x="{margin - 8}" y="{py + 4:.1f}" font-size="11" '
                     f'text-anchor="end">{ty:.4g}</text>')
    return to_px, parts


def export_svg_lines(series, path, title="") -> None:
    """Line plot; ``series`` is a list of (name, xs, ys)."""
    series = [(name, np.asarray(xs, float), np.asarray(ys, float)) for name, xs, ys in series]
    if not series or any(xs.size == 0 for _, xs, _ in series):
        raise ArgumentError("nothing to plot")
    width, height, margin = 800, 500, 60
    x_min = min(xs.min() for _, xs, _ in series)
    x_max = max(xs.max() for _, xs, _ in series)
    y_min = min(ys.min() for _, _, ys in series)
    y_max = max(ys.max() for _, _, ys in series)
    to_px, parts = _axes(x_min, x_max, y_min, y_max, width, height, margin)
    out = [_svg_frame(width, height)]
    if title:
        out.append(f'<text x="{width / 2}" y="25" font-size="15" text-anchor="middle">'
                   f"{title}</text>")
    out.extend(parts)
    for i, (name, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join("{:.1f},{:.1f}".format(*to_px(x, y)) for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        out.append(f'<text x="{width - margin - 5}" y="{margin + 16 * (i + 1)}" '
                   f'font-size="12" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out))


def export_svg_scatter(points, labels, path, title="") -> None:
    """Scatter plot of 2-D points colored by label."""
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        raise ArgumentError("nothing to plot")
    width, height, margin = 800, 500, 60
    to_px, parts = _axes(points[:, 0].min(), points[:, 0].max(),
                         points[:, 1].min(), points[:, 1].max(), width, height, margin)
    classes = sorted({str(l) for l in labels})
    colors = {c: _PALETTE[i % len(_PALETTE)] for i, c in enumerate(classes)}
    out = [_svg_frame(width, height)]
    if title:
        out.append(f'<text x="{width / 2}" y="25" font-size="15" text-anchor="middle">'
                   f"{title}</text>")
    out.extend(parts)
    for (x, y), label in zip(points, labels):
        px, py = to_px(x, y)
        out.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" '
                   f'fill="{colors[str(label)]}" fill-opacity="0.7"/>')
    for i, c in enumerate(classes):
        out.append(f'<text x="{width - margin - 5}" y="{margin + 16 * (i + 1)}" '
                   f'font-size="12" text-anchor="end" fill="{colors[c]}">{c}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out))
