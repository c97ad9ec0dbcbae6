"""Minimal hand-emitted SVG line plots.

No plotting dependencies: axes, ticks, polylines, and a legend are
written directly as SVG elements, so identical data always yields
byte-identical files.
"""

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

_MARGIN_LEFT = 74
_MARGIN_RIGHT = 24
_MARGIN_TOP = 34
_MARGIN_BOTTOM = 54


@dataclass
class Series:
    """One polyline: a label and matching x/y sequences."""

    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    dashed: bool = False

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValidationError(
                f"series {self.label!r}: {len(self.xs)} x values vs "
                f"{len(self.ys)} y values")


def _expand(lo: float, hi: float) -> tuple:
    if lo == hi:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.04
    return lo - pad, hi + pad


def _fmt(v: float) -> str:
    return f"{v:g}"


def _linear_ticks(lo: float, hi: float, count: int = 5) -> list:
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_plot(series, *, xlabel: str = "", ylabel: str = "", title: str = "",
              logy: bool = False, width: int = 720, height: int = 480) -> str:
    """Render the series to an SVG string.

    With logy, points at y <= 0 are dropped (they have no image on a log
    axis) and series left empty vanish; at least one positive point must
    survive.
    """
    kept = []
    for s in series:
        if logy:
            pts = [(float(x), float(y)) for x, y in zip(s.xs, s.ys) if y > 0]
        else:
            pts = [(float(x), float(y)) for x, y in zip(s.xs, s.ys)]
        if pts:
            kept.append((s, pts))
    if not kept:
        raise ValidationError("nothing to plot" +
                              (" (log scale needs positive values)" if logy else ""))
    xs_all = [x for _, pts in kept for x, _ in pts]
    ys_all = [y for _, pts in kept for _, y in pts]
    x_lo, x_hi = _expand(min(xs_all), max(xs_all))
    if logy:
        y_lo_raw, y_hi_raw = math.log10(min(ys_all)), math.log10(max(ys_all))
        y_lo, y_hi = _expand(y_lo_raw, y_hi_raw)
    else:
        y_lo, y_hi = _expand(min(ys_all), max(ys_all))

    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        v = math.log10(y) if logy else y
        return _MARGIN_TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" '
           f'height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{title}</text>')

    for xv in _linear_ticks(x_lo, x_hi):
        xp = px(xv)
        out.append(f'<line x1="{xp:.2f}" y1="{_MARGIN_TOP + plot_h}" '
                   f'x2="{xp:.2f}" y2="{_MARGIN_TOP + plot_h + 5}" stroke="#333"/>')
        out.append(f'<text x="{xp:.2f}" y="{_MARGIN_TOP + plot_h + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_fmt(xv)}</text>')
    if logy:
        decades = range(math.floor(y_lo), math.ceil(y_hi) + 1)
        y_ticks = [(float(d), f"1e{d}") for d in decades if y_lo <= d <= y_hi]
        if len(y_ticks) < 2:
            # narrow range: fall back to 1-2-5 mantissa ticks
            y_ticks = []
            for d in range(math.floor(y_lo) - 1, math.ceil(y_hi) + 1):
                for mant in (1, 2, 5):
                    v = d + math.log10(mant)
                    if y_lo <= v <= y_hi:
                        y_ticks.append((v, _fmt(mant * 10.0 ** d)))
    else:
        y_ticks = [(v, _fmt(v)) for v in _linear_ticks(y_lo, y_hi)]
    for yv, label in y_ticks:
        yp = _MARGIN_TOP + plot_h - (yv - y_lo) / (y_hi - y_lo) * plot_h
        out.append(f'<line x1="{_MARGIN_LEFT - 5}" y1="{yp:.2f}" '
                   f'x2="{_MARGIN_LEFT}" y2="{yp:.2f}" stroke="#333"/>')
        out.append(f'<text x="{_MARGIN_LEFT - 8}" y="{yp + 4:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
    if xlabel:
        out.append(f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" '
                   f'y="{height - 14}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    if ylabel:
        yc = _MARGIN_TOP + plot_h / 2
        out.append(f'<text x="18" y="{yc:.1f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12" '
                   f'transform="rotate(-90 18 {yc:.1f})">{ylabel}</text>')

    for i, (s, pts) in enumerate(kept):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="1.8"{dash}/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.4" '
                       f'fill="{color}"/>')

    ly = _MARGIN_TOP + 14
    for i, (s, _) in enumerate(kept):
        color = PALETTE[i % len(PALETTE)]
        lx = _MARGIN_LEFT + plot_w - 170
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                   f'font-size="11">{s.label}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_plot(series, path, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line_plot(series, **kwargs))
