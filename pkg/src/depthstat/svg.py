"""Minimal static SVG line plots (polylines, axes and tick labels)."""

import numpy as np

__all__ = ["ensemble_overlay_svg", "rate_curves_svg"]

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 20, 30, 45
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _fmt(v):
    return f"{v:.6g}"


def _scale(lo, hi):
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = _scale(*xlim)
        self.y0, self.y1 = _scale(*ylim)

    def px(self, x):
        return _ML + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (_H - _MT - _MB)

    def polyline(self, x, y, color, width=1.0, opacity=1.0):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(self.px(x), self.py(y)))
        return (
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
            f'stroke-opacity="{opacity}" points="{pts}"/>'
        )

    def axes(self, title, xlabel, ylabel):
        out = [
            f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
            f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
            f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        ]
        for t in np.linspace(self.x0, self.x1, 6):
            x = float(self.px(t))
            out.append(f'<line x1="{x:.2f}" y1="{_H - _MB}" x2="{x:.2f}" y2="{_H - _MB + 4}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{_H - _MB + 16}" font-size="11" text-anchor="middle">{_fmt(t)}</text>')
        for t in np.linspace(self.y0, self.y1, 6):
            y = float(self.py(t))
            out.append(f'<line x1="{_ML - 4}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{_ML - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{_fmt(t)}</text>')
        out.append(f'<text x="{_W / 2}" y="18" font-size="13" text-anchor="middle">{_esc(title)}</text>')
        out.append(f'<text x="{_W / 2}" y="{_H - 8}" font-size="12" text-anchor="middle">{_esc(xlabel)}</text>')
        out.append(
            f'<text x="14" y="{_H / 2}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 14 {_H / 2})">{_esc(ylabel)}</text>'
        )
        return out


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _document(body):
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    return "\n".join([head, *body, "</svg>"]) + "\n"


def ensemble_overlay_svg(points, ensemble, observed, title="", max_curves=200):
    """Bootstrap statistics in grey with the observed statistic on top in red.

    Only the first ``max_curves`` ensemble rows are drawn.
    """
    ens = np.asarray(ensemble, dtype=float)[:max_curves]
    obs = np.asarray(observed, dtype=float)
    ally = np.concatenate([ens.ravel(), obs])
    fr = _Frame((float(points[0]), float(points[-1])), (float(ally.min()), float(ally.max())))
    body = fr.axes(title, "t", "statistic")
    body += [fr.polyline(points, row, "#808080", 0.6, 0.4) for row in ens]
    body.append(fr.polyline(points, obs, "#d62728", 2.0))
    return _document(body)


def rate_curves_svg(x, series, title="", alpha=None):
    """One polyline per ``name -> rates`` entry of ``series`` against ``x``, with a legend."""
    fr = _Frame((float(min(x)), float(max(x))), (0.0, 1.0))
    body = fr.axes(title, "c", "rejection rate")
    if alpha is not None:
        body.append(fr.polyline([min(x), max(x)], [alpha, alpha], "#000000", 0.8, 0.5))
    for k, (name, rates) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        body.append(fr.polyline(x, rates, color, 1.8))
        y = _MT + 14 * (k + 1)
        body.append(f'<line x1="{_W - 120}" y1="{y - 4}" x2="{_W - 100}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_W - 95}" y="{y}" font-size="11">{_esc(name)}</text>')
    return _document(body)
