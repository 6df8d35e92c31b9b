"""Self-contained SVG line charts.

Hand-rolled rather than delegated to a plotting library so that output is
byte-deterministic and free of external fonts, ids, or timestamps: the same
table always yields the same file.
"""
from __future__ import annotations

import math

_WIDTH, _HEIGHT = 800, 500
_ML, _MR, _MT, _MB = 70, 160, 30, 50
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    s = format(v, ".6g")
    return "0" if s == "-0" else s


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return out or [lo]


def svg_line_chart(x: list[float], series: dict[str, list[float]], x_label: str) -> str:
    """Render one polyline per series over a shared x axis."""
    if not series:
        raise ValueError("no columns selected for plotting")
    if not x:
        raise ValueError("cannot plot an empty table")
    for name, ys in series.items():
        if len(ys) != len(x):
            raise ValueError(f"column {name}: {len(ys)} values for {len(x)} x points")

    xmin, xmax = min(x), max(x)
    ymin = min(min(ys) for ys in series.values())
    ymax = max(max(ys) for ys in series.values())
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    pw = _WIDTH - _ML - _MR
    ph = _HEIGHT - _MT - _MB

    def px(v: float) -> float:
        return _ML + pw * (v - xmin) / (xmax - xmin)

    def py(v: float) -> float:
        return _MT + ph * (1.0 - (v - ymin) / (ymax - ymin))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" stroke="black"/>',
    ]
    for t in _ticks(xmin, xmax):
        parts.append(
            f'<line x1="{_fmt(px(t))}" y1="{_MT + ph}" x2="{_fmt(px(t))}" y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(px(t))}" y="{_MT + ph + 20}" font-family="monospace" font-size="12" '
            f'text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(ymin, ymax):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{_fmt(py(t))}" x2="{_ML}" y2="{_fmt(py(t))}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{_fmt(py(t) + 4)}" font-family="monospace" font-size="12" '
            f'text-anchor="end">{_fmt(t)}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2}" y="{_HEIGHT - 12}" font-family="monospace" font-size="13" '
        f'text-anchor="middle">{x_label}</text>'
    )
    for i, (name, ys) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = _MT + 16 + 18 * i
        parts.append(
            f'<line x1="{_ML + pw + 10}" y1="{ly - 4}" x2="{_ML + pw + 34}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_ML + pw + 40}" y="{ly}" font-family="monospace" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_pgm(path, grid) -> None:
    """8-bit grayscale PGM (binary P5), grid min..max stretched to 0..255."""
    import numpy as np

    g = np.asarray(grid, dtype=np.float64)
    lo, hi = float(g.min()), float(g.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    pix = np.rint((g - lo) * scale).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())
