"""Minimal deterministic SVG plots for wave-field artifacts.

Self-contained line plots and heatmaps with labeled axes; byte-identical
output for identical inputs (no timestamps, fixed float formatting).
"""

from __future__ import annotations

import math

import numpy as np

W, H = 720, 480
ML, MR, MT, MB = 72, 24, 36, 52   # plot margins

# diverging blue-white-red, linear ramps
_STOPS = ((0.0, (33, 68, 160)), (0.5, (247, 247, 247)), (1.0, (178, 24, 43)))


def _r(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return s if s else "0"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _color(frac: float) -> str:
    frac = min(1.0, max(0.0, frac))
    for (f0, c0), (f1, c1) in zip(_STOPS, _STOPS[1:]):
        if frac <= f1:
            w = 0.0 if f1 == f0 else (frac - f0) / (f1 - f0)
            r, g, b = (round(a + w * (b_ - a)) for a, b_ in zip(c0, c1))
            return f"#{r:02x}{g:02x}{b:02x}"
    return "#b2182b"


class _Frame:
    """Maps data coordinates into the plot rectangle and draws furniture."""

    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        if y_hi <= y_lo:
            pad = 1.0 if y_lo == 0 else abs(y_lo) * 0.1
            y_lo, y_hi = y_lo - pad, y_hi + pad
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi

    def px(self, x: float) -> float:
        return ML + (x - self.x_lo) / (self.x_hi - self.x_lo) * (W - ML - MR)

    def py(self, y: float) -> float:
        return H - MB - (y - self.y_lo) / (self.y_hi - self.y_lo) * (H - MT - MB)

    def furniture(self, xlabel: str, ylabel: str, title: str) -> list[str]:
        out = [f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" '
               f'height="{H - MT - MB}" fill="none" stroke="#444"/>']
        for t in _nice_ticks(self.x_lo, self.x_hi):
            x = self.px(t)
            out.append(f'<line x1="{_r(x)}" y1="{H - MB}" x2="{_r(x)}" '
                       f'y2="{H - MB + 5}" stroke="#444"/>')
            out.append(f'<text x="{_r(x)}" y="{H - MB + 18}" font-size="11" '
                       f'text-anchor="middle" fill="#222">{t:g}</text>')
        for t in _nice_ticks(self.y_lo, self.y_hi):
            y = self.py(t)
            out.append(f'<line x1="{ML - 5}" y1="{_r(y)}" x2="{ML}" '
                       f'y2="{_r(y)}" stroke="#444"/>')
            out.append(f'<text x="{ML - 8}" y="{_r(y + 4)}" font-size="11" '
                       f'text-anchor="end" fill="#222">{t:g}</text>')
        out.append(f'<text x="{(ML + W - MR) // 2}" y="{H - 12}" font-size="13" '
                   f'text-anchor="middle" fill="#222">{xlabel}</text>')
        out.append(f'<text x="16" y="{(MT + H - MB) // 2}" font-size="13" '
                   f'text-anchor="middle" fill="#222" '
                   f'transform="rotate(-90 16 {(MT + H - MB) // 2})">{ylabel}</text>')
        out.append(f'<text x="{(ML + W - MR) // 2}" y="22" font-size="14" '
                   f'text-anchor="middle" fill="#000">{title}</text>')
        return out


def _document(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">'
            f'<rect width="{W}" height="{H}" fill="#ffffff"/>')
    return head + "".join(body) + "</svg>\n"


def line_plot(x, y, xlabel: str, ylabel: str, title: str) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fr = _Frame(float(x.min()), float(x.max()), float(y.min()), float(y.max()))
    pts = " ".join(f"{_r(fr.px(a))},{_r(fr.py(b))}" for a, b in zip(x, y))
    body = fr.furniture(xlabel, ylabel, title)
    body.append(f'<polyline points="{pts}" fill="none" '
                f'stroke="#2166ac" stroke-width="1.5"/>')
    return _document(body)


def heatmap(x, y, z, xlabel: str, ylabel: str, title: str) -> str:
    """z[j][i] drawn at (x[i], y[j]); color scaled to max |z|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    fr = _Frame(float(x.min()), float(x.max()), float(y.min()), float(y.max()))
    scale = float(np.max(np.abs(z))) or 1.0
    body = fr.furniture(xlabel, ylabel, title)
    # cell edges at midpoints between samples
    def edges(v):
        mids = (v[1:] + v[:-1]) / 2.0
        return np.concatenate(([v[0]], mids, [v[-1]]))
    ex, ey = edges(x), edges(y)
    for j in range(len(y)):
        for i in range(len(x)):
            x0, x1 = fr.px(ex[i]), fr.px(ex[i + 1])
            y0, y1 = fr.py(ey[j + 1]), fr.py(ey[j])
            c = _color(0.5 + 0.5 * z[j, i] / scale)
            body.append(f'<rect x="{_r(x0)}" y="{_r(y0)}" '
                        f'width="{_r(x1 - x0)}" height="{_r(y1 - y0)}" '
                        f'fill="{c}"/>')
    body.append(f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" '
                f'height="{H - MT - MB}" fill="none" stroke="#444"/>')
    return _document(body)
