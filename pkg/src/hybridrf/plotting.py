"""Minimal SVG line plot of rate curves (rate in bits/s/Hz against SNR in dB)."""
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["render_rates_svg"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
_W, _H = 720, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 230, 30, 60


def _ticks(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + 0.5 * step, step)]


def _fmt(v):
    return f"{v:.6g}"


def render_rates_svg(curves, title="Achievable rate"):
    """SVG document with one ``<polyline>`` per curve; NaN points are skipped."""
    x = np.concatenate([c.snr_db for c in curves])
    ys = [c.mean_rate[np.isfinite(c.mean_rate)] for c in curves]
    y_all = np.concatenate(ys) if ys else np.zeros(0)
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_hi = float(y_all.max()) if y_all.size else 1.0
    y_ticks = _ticks(0.0, y_hi * 1.05 if y_hi > 0 else 1.0)
    y_top = y_ticks[-1]
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(v):
        return _LEFT + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return _TOP + ph - v / y_top * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_LEFT + pw / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for t in _ticks(x_lo, x_hi):
        if x_lo - 1e-9 <= t <= x_hi + 1e-9:
            px = _fmt(sx(t))
            out.append(f'<line x1="{px}" y1="{_TOP}" x2="{px}" y2="{_TOP + ph}" stroke="#e0e0e0"/>')
            out.append(f'<text x="{px}" y="{_TOP + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in y_ticks:
        py = _fmt(sy(t))
        out.append(f'<line x1="{_LEFT}" y1="{py}" x2="{_LEFT + pw}" y2="{py}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{py}" text-anchor="end" dominant-baseline="middle">{_fmt(t)}</text>')
    out.append(f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{_LEFT + pw / 2}" y="{_H - 15}" text-anchor="middle">SNR (dB)</text>')
    out.append(f'<text x="18" y="{_TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_TOP + ph / 2})">Rate (bits/s/Hz)</text>')

    for i, c in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(c.mean_rate)
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(c.snr_db[ok], c.mean_rate[ok]))
        dash = ' stroke-dasharray="6 4"' if "/analytic" in c.method else ""
        out.append(f'<polyline data-method="{escape(c.method)}" points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        ly = _TOP + 10 + 20 * i
        lx = _LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        label = c.method + (" (flagged)" if c.flagged else "")
        out.append(f'<text x="{lx + 32}" y="{ly}" dominant-baseline="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
