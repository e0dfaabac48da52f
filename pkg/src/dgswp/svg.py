"""Tiny SVG writer for scatter plots with plan segments and line charts."""
from __future__ import annotations

import math

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


class _Frame:
    def __init__(self, xs, ys, width, height, margin=40):
        xs = np.asarray([v for v in xs if math.isfinite(v)], dtype=float)
        ys = np.asarray([v for v in ys if math.isfinite(v)], dtype=float)
        self.x0, self.x1 = (xs.min(), xs.max()) if xs.size else (0.0, 1.0)
        self.y0, self.y1 = (ys.min(), ys.max()) if ys.size else (0.0, 1.0)
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 1, self.x1 + 1
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 1, self.y1 + 1
        self.w, self.h, self.m = width, height, margin

    def sx(self, x):
        return self.m + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)

    def sy(self, y):
        return self.h - self.m - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)

    def axes(self, xlabel="", ylabel=""):
        m, w, h = self.m, self.w, self.h
        out = [
            f'<line x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}" stroke="black"/>',
            f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h - m}" stroke="black"/>',
            f'<text x="{m}" y="{h - m + 15}" font-size="10">{self.x0:.3g}</text>',
            f'<text x="{w - m}" y="{h - m + 15}" font-size="10" text-anchor="end">{self.x1:.3g}</text>',
            f'<text x="{m - 4}" y="{h - m}" font-size="10" text-anchor="end">{self.y0:.3g}</text>',
            f'<text x="{m - 4}" y="{m + 8}" font-size="10" text-anchor="end">{self.y1:.3g}</text>',
        ]
        if xlabel:
            out.append(f'<text x="{w / 2}" y="{h - 8}" font-size="12" text-anchor="middle">{xlabel}</text>')
        if ylabel:
            out.append(f'<text x="12" y="{h / 2}" font-size="12" text-anchor="middle" '
                       f'transform="rotate(-90 12 {h / 2})">{ylabel}</text>')
        return out


def _doc(body, width, height, title=""):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n')
    if title:
        head += f'<text x="{width / 2}" y="18" font-size="14" text-anchor="middle">{title}</text>\n'
    return head + "\n".join(body) + "\n</svg>\n"


def scatter_with_plan(path, source, target, plan=None, title="", width=480, height=480):
    """Source (blue) and target (red) 2D points, plan entries as grey segments."""
    source = np.asarray(source)[:, :2]
    target = np.asarray(target)[:, :2]
    allp = np.vstack([source, target])
    fr = _Frame(allp[:, 0], allp[:, 1], width, height)
    body = fr.axes()
    if plan is not None:
        top = plan.mass.max() if plan.nnz else 1.0
        for i, j, w in zip(plan.rows, plan.cols, plan.mass):
            a, b = source[i], target[j]
            body.append(f'<line x1="{fr.sx(a[0]):.2f}" y1="{fr.sy(a[1]):.2f}" x2="{fr.sx(b[0]):.2f}" '
                        f'y2="{fr.sy(b[1]):.2f}" stroke="grey" stroke-opacity="{0.2 + 0.6 * w / top:.2f}"/>')
    for pts, color in ((source, PALETTE[0]), (target, PALETTE[1])):
        for x, y in pts:
            body.append(f'<circle cx="{fr.sx(x):.2f}" cy="{fr.sy(y):.2f}" r="2.5" fill="{color}"/>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_doc(body, width, height, title))


def line_plot(path, series, title="", xlabel="", ylabel="", width=560, height=360):
    """``series`` maps a label to (x, y) sequences; non-finite values are skipped."""
    xs = [v for x, _ in series.values() for v in x]
    ys = [v for _, y in series.values() for v in y]
    fr = _Frame(xs, ys, width, height)
    body = fr.axes(xlabel, ylabel)
    for k, (label, (x, y)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{fr.sx(a):.2f},{fr.sy(b):.2f}" for a, b in zip(x, y)
                       if math.isfinite(a) and math.isfinite(b))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.append(f'<text x="{width - 45}" y="{45 + 14 * k}" font-size="11" fill="{color}" '
                    f'text-anchor="end">{label}</text>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_doc(body, width, height, title))
