"""Minimal deterministic SVG charts.

Every chart is written from a fixed template with coordinates rounded to two
decimals, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

import numpy as np

from .evalreport import RocPoint

W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf"]


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xlim, ylim, width=W, height=H):
        self.width, self.height = width, height
        self.xlim, self.ylim = _pad(xlim), _pad(ylim)
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text x="{_f(width / 2)}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    def x(self, v):
        lo, hi = self.xlim
        return LEFT + (v - lo) / (hi - lo) * (self.width - LEFT - RIGHT)

    def y(self, v):
        lo, hi = self.ylim
        return self.height - BOTTOM - (v - lo) / (hi - lo) * (self.height - TOP - BOTTOM)

    def _axes(self, xlabel, ylabel):
        x0, x1 = LEFT, self.width - RIGHT
        y0, y1 = self.height - BOTTOM, TOP
        p = self.parts
        p.append(f'<g class="axes" stroke="black" fill="none">'
                 f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
                 f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>')
        for t in _ticks(*self.xlim):
            p.append(f'<text x="{_f(self.x(t))}" y="{y0 + 15}" text-anchor="middle">{_f(t)}</text>')
        for t in _ticks(*self.ylim):
            p.append(f'<text x="{x0 - 5}" y="{_f(self.y(t) + 4)}" text-anchor="end">{_f(t)}</text>')
        p.append(f'<text x="{_f((x0 + x1) / 2)}" y="{self.height - 12}" text-anchor="middle">'
                 f'{escape(xlabel)}</text>')
        p.append(f'<text x="14" y="{_f((y0 + y1) / 2)}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {_f((y0 + y1) / 2)})">{escape(ylabel)}</text>')

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(self.parts + ["</svg>"]) + "\n")


def _pad(lim):
    lo, hi = float(lim[0]), float(lim[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return 0.0, 1.0
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    return lo, hi


def _ticks(lo, hi, n=5):
    return [lo + k * (hi - lo) / (n - 1) for k in range(n)]


def _finite(values):
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    return arr[np.isfinite(arr)]


def roc_svg(points: Sequence[RocPoint], path, title: str = "ROC") -> None:
    """Median FPRp against median TPR, one polyline per id, TPR 5-95% bars."""
    pts = [pt for pt in points if pt.n_ok > 0]
    xs = _finite([pt.median_fprp for pt in pts])
    ys = _finite([v for pt in pts for v in (pt.tpr_q05, pt.tpr_q95)])
    xlim = (0.0, max(1.0, float(xs.max()) if xs.size else 1.0))
    ylim = (0.0, max(1.0, float(ys.max()) if ys.size else 1.0))
    c = _Canvas(title, "FPRp", "TPR", xlim, ylim)
    ids = sorted({pt.id for pt in pts})
    for k, alg in enumerate(ids):
        color = PALETTE[k % len(PALETTE)]
        own = [pt for pt in pts if pt.id == alg]
        if len(own) > 1:
            coords = " ".join(f"{_f(c.x(pt.median_fprp))},{_f(c.y(pt.median_tpr))}" for pt in own)
            c.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        for pt in own:
            x = _f(c.x(pt.median_fprp))
            c.parts.append(f'<line class="errorbar" x1="{x}" y1="{_f(c.y(pt.tpr_q05))}" '
                           f'x2="{x}" y2="{_f(c.y(pt.tpr_q95))}" stroke="{color}"/>')
            c.parts.append(f'<circle class="marker" cx="{x}" cy="{_f(c.y(pt.median_tpr))}" r="3" '
                           f'fill="{color}"><title>{escape(alg)} {escape(pt.param)}</title></circle>')
        c.parts.append(f'<text x="{W - RIGHT - 5}" y="{TOP + 14 * (k + 1)}" text-anchor="end" '
                       f'fill="{color}">{escape(alg)}</text>')
    c.save(path)


def series_svg(index: Sequence[float], values: Sequence[float], path, title: str = "",
               ylabel: str = "") -> None:
    """Line chart of a trajectory functional against iteration index."""
    index, values = np.asarray(index, dtype=float), np.asarray(values, dtype=float)
    xlim = (float(index.min()), float(index.max())) if index.size else (0.0, 1.0)
    fv = values[np.isfinite(values)]
    ylim = (float(fv.min()), float(fv.max())) if fv.size else (0.0, 1.0)
    c = _Canvas(title, "iteration", ylabel, xlim, ylim)
    if index.size:
        coords = " ".join(f"{_f(c.x(i))},{_f(c.y(v))}" for i, v in zip(index, values))
        c.parts.append(f'<polyline class="series" points="{coords}" fill="none" stroke="{PALETTE[0]}"/>')
    c.save(path)


def stems_svg(acf: Sequence[float], path, title: str = "autocorrelation") -> None:
    """Stem plot of autocorrelations r_0..r_L."""
    acf = np.asarray(acf, dtype=float)
    c = _Canvas(title, "lag", "r", (0.0, max(1.0, float(len(acf) - 1))),
                (min(-1.0, float(acf.min()) if acf.size else -1.0), 1.0))
    zero = _f(c.y(0.0))
    for k, r in enumerate(acf):
        x = _f(c.x(k))
        c.parts.append(f'<line class="stem" x1="{x}" y1="{zero}" x2="{x}" y2="{_f(c.y(r))}" '
                       f'stroke="{PALETTE[0]}"/>')
    c.save(path)


def heatmap_svg(matrix: np.ndarray, labels: Sequence[str], path, title: str = "") -> None:
    """Grid of cells shaded by value in [0, 1]; rows are tails, columns heads."""
    m = np.asarray(matrix, dtype=float)
    p = m.shape[0]
    cell = max(4, min(24, 400 // max(p, 1)))
    margin = 60
    size = margin + cell * p + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="9">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{_f(size / 2)}" y="14" text-anchor="middle" font-size="12">{escape(title)}</text>',
    ]
    for i in range(p):
        y = margin + i * cell
        parts.append(f'<text x="{margin - 3}" y="{_f(y + cell * 0.7)}" text-anchor="end">'
                     f'{escape(str(labels[i]))}</text>')
        parts.append(f'<text x="{_f(margin + i * cell + cell * 0.7)}" y="{margin - 3}" '
                     f'transform="rotate(-90 {_f(margin + i * cell + cell * 0.7)} {margin - 3})">'
                     f'{escape(str(labels[i]))}</text>')
        for j in range(p):
            v = min(max(m[i, j], 0.0), 1.0) if np.isfinite(m[i, j]) else 0.0
            shade = int(round(255 * (1 - v)))
            parts.append(f'<rect class="cell" x="{margin + j * cell}" y="{y}" width="{cell}" '
                         f'height="{cell}" fill="rgb({shade},{shade},255)" stroke="#ccc">'
                         f'<title>{_f(v)}</title></rect>')
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts + ["</svg>"]) + "\n")
