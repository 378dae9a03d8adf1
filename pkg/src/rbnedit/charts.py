"""Minimal deterministic SVG line charts with optional min/max error bars."""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
PANEL_W, PANEL_H = 360, 260
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 50, 20, 30, 45


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]
    lo: list[float] | None = None
    hi: list[float] | None = None


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    ylim: tuple[float, float] = (0.0, 1.0)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _panel_svg(p: Panel, ox: float) -> list[str]:
    xs = [x for s in p.series for x in s.xs]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    y0, y1 = p.ylim
    iw = PANEL_W - MARGIN_L - MARGIN_R
    ih = PANEL_H - MARGIN_T - MARGIN_B

    def px(x):
        return ox + MARGIN_L + (x - x0) / (x1 - x0) * iw

    def py(y):
        return MARGIN_T + (1 - (y - y0) / (y1 - y0)) * ih

    out = [f'<text x="{_f(ox + PANEL_W / 2)}" y="18" text-anchor="middle" font-size="13">{escape(p.title)}</text>',
           f'<rect x="{_f(ox + MARGIN_L)}" y="{MARGIN_T}" width="{iw}" height="{ih}" fill="none" stroke="#444"/>']
    for i in range(6):
        y = y0 + (y1 - y0) * i / 5
        out.append(f'<text x="{_f(ox + MARGIN_L - 4)}" y="{_f(py(y) + 4)}" text-anchor="end" font-size="10">{y:.1f}</text>')
    ticks = sorted(set(xs)) if len(set(xs)) <= 12 else [x0 + (x1 - x0) * i / 5 for i in range(6)]
    for x in ticks:
        out.append(f'<text x="{_f(px(x))}" y="{_f(MARGIN_T + ih + 14)}" text-anchor="middle" font-size="10">{x:g}</text>')
    out.append(f'<text x="{_f(ox + MARGIN_L + iw / 2)}" y="{PANEL_H - 8}" text-anchor="middle" font-size="11">{escape(p.xlabel)}</text>')
    out.append(f'<text x="{_f(ox + 12)}" y="{_f(MARGIN_T + ih / 2)}" text-anchor="middle" font-size="11" '
               f'transform="rotate(-90 {_f(ox + 12)} {_f(MARGIN_T + ih / 2)})">{escape(p.ylabel)}</text>')
    for n, s in enumerate(p.series):
        col = PALETTE[n % len(PALETTE)]
        pts = " ".join(f"{_f(px(x))},{_f(py(y))}" for x, y in zip(s.xs, s.ys) if y is not None)
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        if s.lo is not None and s.hi is not None:
            for x, lo, hi in zip(s.xs, s.lo, s.hi):
                if lo is None or hi is None:
                    continue
                out.append(f'<line x1="{_f(px(x))}" y1="{_f(py(lo))}" x2="{_f(px(x))}" y2="{_f(py(hi))}" stroke="{col}"/>')
        ly = MARGIN_T + 12 + 13 * n
        out.append(f'<line x1="{_f(ox + PANEL_W - MARGIN_R - 70)}" y1="{ly - 4}" x2="{_f(ox + PANEL_W - MARGIN_R - 56)}" '
                   f'y2="{ly - 4}" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{_f(ox + PANEL_W - MARGIN_R - 52)}" y="{ly}" font-size="10">{escape(s.label)}</text>')
    return out


def render(panels: list[Panel], title: str = "") -> str:
    width = PANEL_W * len(panels)
    height = PANEL_H + (20 if title else 0)
    body = []
    for i, p in enumerate(panels):
        body.extend(_panel_svg(p, i * PANEL_W))
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
            '<rect width="100%" height="100%" fill="white"/>']
    if title:
        head.append(f'<text x="{width / 2:.2f}" y="{height - 4}" text-anchor="middle" font-size="11">{escape(title)}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"
