"""Static SVG figures written by hand.

Coordinates are printed with a fixed number of decimals so that the same
data always yields the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

WIDTH, HEIGHT = 640, 420
MARGIN = 50


def _f(v: float) -> str:
    return f"{v:.3f}"


def _scale(values: np.ndarray, lo_px: float, hi_px: float) -> np.ndarray:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        return np.full(values.shape, 0.5 * (lo_px + hi_px))
    return lo_px + (values - lo) / (hi - lo) * (hi_px - lo_px)


class _Svg:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
            f'font-size="15">{escape(title)}</text>',
        ]

    def add(self, s: str) -> None:
        self.parts.append(s)

    def frame(self, xlabel: str = "", ylabel: str = "") -> None:
        x0, y0, x1, y1 = MARGIN, MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN
        self.add(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" stroke="#444"/>')
        if xlabel:
            self.add(f'<text x="{WIDTH // 2}" y="{HEIGHT - 14}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
        if ylabel:
            self.add(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12" transform="rotate(-90 16 {HEIGHT // 2})">{escape(ylabel)}</text>')

    def legend(self, names, colours) -> None:
        for k, (name, col) in enumerate(zip(names, colours)):
            y = MARGIN + 14 + 16 * k
            self.add(f'<rect x="{WIDTH - MARGIN - 110}" y="{y - 9}" width="10" height="10" fill="{col}"/>')
            self.add(f'<text x="{WIDTH - MARGIN - 95}" y="{y}" font-family="sans-serif" '
                     f'font-size="11">{escape(str(name))}</text>')

    def save(self, path: str | Path) -> None:
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8", newline="\n")


def _points(svg: _Svg, px: np.ndarray, py: np.ndarray, labels: np.ndarray, values) -> None:
    for i in range(px.size):
        col = PALETTE[int(labels[i]) % len(PALETTE)]
        data = " ".join(_f(v) for v in values[i])
        svg.add(f'<circle cx="{_f(px[i])}" cy="{_f(py[i])}" r="2.5" fill="{col}" '
                f'fill-opacity="0.7" data-v="{data}"/>')


def _cluster_legend(svg: _Svg, labels: np.ndarray) -> None:
    K = int(labels.max()) + 1
    svg.legend([f"cluster {k}" for k in range(K)], [PALETTE[k % len(PALETTE)] for k in range(K)])


def strip_plot(x, labels, path: str | Path, title: str = "1-D embedding") -> None:
    """One row of points per cluster along a shared value axis."""
    x = np.asarray(x, dtype=np.float64).ravel()
    labels = np.asarray(labels)
    K = int(labels.max()) + 1
    svg = _Svg(title)
    svg.frame(xlabel="x")
    px = _scale(x, MARGIN + 10, WIDTH - MARGIN - 10)
    rows = np.linspace(MARGIN + 40, HEIGHT - MARGIN - 40, K) if K > 1 else np.array([HEIGHT / 2])
    py = rows[labels]
    _points(svg, px, py, labels, x[:, None])
    _cluster_legend(svg, labels)
    svg.save(path)


def scatter_plot(X, labels, path: str | Path, title: str = "2-D embedding") -> None:
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    svg = _Svg(title)
    svg.frame(xlabel="x_1", ylabel="x_2")
    px = _scale(X[:, 0], MARGIN + 10, WIDTH - MARGIN - 10)
    py = _scale(X[:, 1], HEIGHT - MARGIN - 10, MARGIN + 10)
    _points(svg, px, py, labels, X)
    _cluster_legend(svg, labels)
    svg.save(path)


# fixed oblique view of 3-D points onto the page
_VIEW = np.array([
    [np.cos(np.pi / 6), -np.cos(np.pi / 6), 0.0],
    [-np.sin(np.pi / 6), -np.sin(np.pi / 6), 1.0],
])


def projected_scatter(X, labels, path: str | Path, title: str = "3-D embedding (projected)") -> None:
    X = np.asarray(X, dtype=np.float64)
    P = X @ _VIEW.T
    labels = np.asarray(labels)
    svg = _Svg(title)
    svg.frame()
    px = _scale(P[:, 0], MARGIN + 10, WIDTH - MARGIN - 10)
    py = _scale(P[:, 1], HEIGHT - MARGIN - 10, MARGIN + 10)
    _points(svg, px, py, labels, X)
    _cluster_legend(svg, labels)
    svg.save(path)


def embedding_plot(X, labels, path: str | Path, title: str | None = None) -> None:
    """Strip plot, 2-D scatter or projected 3-D scatter depending on the width of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    X = X[:, None] if X.ndim == 1 else X
    d = X.shape[1]
    if d == 1:
        strip_plot(X[:, 0], labels, path, title or "1-D embedding")
    elif d == 2:
        scatter_plot(X, labels, path, title or "2-D embedding")
    else:
        projected_scatter(X[:, :3], labels, path, title or f"{d}-D embedding (projected)")


def line_plot(t, series: dict, path: str | Path, title: str, ylabel: str = "") -> None:
    """Polylines sharing the x axis ``t``; keys of ``series`` become legend entries."""
    t = np.asarray(t, dtype=np.float64)
    allv = np.concatenate([np.asarray(v, dtype=np.float64) for v in series.values()])
    lo, hi = float(allv.min()), float(allv.max())
    svg = _Svg(title)
    svg.frame(xlabel="iteration", ylabel=ylabel)
    px = _scale(t, MARGIN + 10, WIDTH - MARGIN - 10)
    colours = []
    for k, (name, vals) in enumerate(series.items()):
        col = PALETTE[k % len(PALETTE)]
        colours.append(col)
        v = np.asarray(vals, dtype=np.float64)
        py = _scale(np.concatenate([v, [lo, hi]]), HEIGHT - MARGIN - 10, MARGIN + 10)[: v.size]
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(px, py))
        svg.add(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
    svg.add(f'<text x="{MARGIN + 4}" y="{MARGIN - 6}" font-family="sans-serif" font-size="11">'
            f'max {hi:.4g}</text>')
    svg.legend(list(series), colours)
    svg.save(path)
