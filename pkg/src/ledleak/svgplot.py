"""Minimal deterministic SVG line plots.

Figures ship as plain scalable vector files written directly, with the
backing numbers emitted alongside as delimited text, so nothing about
rendering depends on a plotting package being installed or on what
version of one happens to be around.  Output is byte-stable: same
series, same file.

Only what the figures need: line and step traces on a single pair of
axes, 1-2-5 tick placement, a legend when labels are present, and point
annotations.  Coordinates are rounded to fixed precision so the text is
reproducible, and all styling is inline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

PALETTE = ("#1f6fb4", "#c23b22", "#2e8540", "#7a4ea3", "#b8860b", "#444444")

_MARGIN_L = 66.0
_MARGIN_R = 14.0
_MARGIN_T = 30.0
_MARGIN_B = 46.0


@dataclass(frozen=True)
class Series:
    """One trace: paired x and y values, drawn in order."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    label: str = ""
    color: str | None = None
    step: bool = False
    width: float = 1.4

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys):
            raise ValueError(f"xs has {len(self.xs)} points, ys has {len(self.ys)}")
        if len(self.xs) < 2:
            raise ValueError("a series needs at least two points")


@dataclass(frozen=True)
class Annotation:
    """A marked point with a short text callout."""

    x: float
    y: float
    text: str


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions on the 1-2-5 ladder covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("tick range must be finite")
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _label(v: float) -> str:
    return f"{v:.6g}"


def render_plot(
    series: list[Series],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: float = 760.0,
    height: float = 430.0,
    xlim: tuple[float, float] | None = None,
    ylim: tuple[float, float] | None = None,
    annotations: tuple[Annotation, ...] = (),
) -> str:
    """Render series to a complete standalone SVG document string."""
    if not series:
        raise ValueError("nothing to plot")
    xs_all = [x for s in series for x in s.xs] + [a.x for a in annotations]
    ys_all = [y for s in series for y in s.ys] + [a.y for a in annotations]
    x_lo, x_hi = xlim if xlim else (min(xs_all), max(xs_all))
    y_lo, y_hi = ylim if ylim else (min(ys_all), max(ys_all))
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    # breathe a little above and below the data unless pinned
    if ylim is None:
        pad = 0.06 * (y_hi - y_lo)
        y_lo -= pad
        y_hi += pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    out.append(f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>')
    font = 'font-family="Helvetica, Arial, sans-serif"'

    # grid and ticks
    for t in nice_ticks(x_lo, x_hi):
        if not x_lo <= t <= x_hi:
            continue
        x = px(t)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(_MARGIN_T)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(_MARGIN_T + plot_h)}" stroke="#e4e4e4" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{_fmt(_MARGIN_T + plot_h + 16)}" {font} '
            f'font-size="11" text-anchor="middle" fill="#333333">{_label(t)}</text>'
        )
    for t in nice_ticks(y_lo, y_hi):
        if not y_lo <= t <= y_hi:
            continue
        y = py(t)
        out.append(
            f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(y)}" x2="{_fmt(_MARGIN_L + plot_w)}" '
            f'y2="{_fmt(y)}" stroke="#e4e4e4" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(_MARGIN_L - 7)}" y="{_fmt(y + 3.5)}" {font} '
            f'font-size="11" text-anchor="end" fill="#333333">{_label(t)}</text>'
        )
    out.append(
        f'<rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#333333" stroke-width="1"/>'
    )

    # traces, clipped to the frame
    out.append(
        f'<clipPath id="frame"><rect x="{_fmt(_MARGIN_L)}" y="{_fmt(_MARGIN_T)}" '
        f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}"/></clipPath>'
    )
    out.append('<g clip-path="url(#frame)">')
    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        pts: list[str] = []
        prev_y = None
        for x, y in zip(s.xs, s.ys):
            if s.step and prev_y is not None:
                pts.append(f"{_fmt(px(x))},{_fmt(py(prev_y))}")
            pts.append(f"{_fmt(px(x))},{_fmt(py(y))}")
            prev_y = y
        out.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(s.width)}" stroke-linejoin="round"/>'
        )
    out.append("</g>")

    for a in annotations:
        x, y = px(a.x), py(a.y)
        out.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="none" '
            f'stroke="#c23b22" stroke-width="1.6"/>'
        )
        tx = x + 8 if x < _MARGIN_L + 0.75 * plot_w else x - 8
        anchor = "start" if x < _MARGIN_L + 0.75 * plot_w else "end"
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(y - 7)}" {font} font-size="11" '
            f'text-anchor="{anchor}" fill="#c23b22">{escape(a.text)}</text>'
        )

    if title:
        out.append(
            f'<text x="{_fmt(width / 2)}" y="19" {font} font-size="14" '
            f'text-anchor="middle" fill="#111111">{escape(title)}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{_fmt(_MARGIN_L + plot_w / 2)}" y="{_fmt(height - 10)}" {font} '
            f'font-size="12" text-anchor="middle" fill="#111111">{escape(xlabel)}</text>'
        )
    if ylabel:
        cy = _MARGIN_T + plot_h / 2
        out.append(
            f'<text x="15" y="{_fmt(cy)}" {font} font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 15 {_fmt(cy)})" fill="#111111">{escape(ylabel)}</text>'
        )

    labeled = [s for s in series if s.label]
    if labeled:
        lx = _MARGIN_L + 10
        ly = _MARGIN_T + 10
        for i, s in enumerate(series):
            if not s.label:
                continue
            color = s.color or PALETTE[i % len(PALETTE)]
            out.append(
                f'<line x1="{_fmt(lx)}" y1="{_fmt(ly + 4)}" x2="{_fmt(lx + 20)}" '
                f'y2="{_fmt(ly + 4)}" stroke="{color}" stroke-width="2"/>'
            )
            out.append(
                f'<text x="{_fmt(lx + 26)}" y="{_fmt(ly + 8)}" {font} font-size="11" '
                f'fill="#111111">{escape(s.label)}</text>'
            )
            ly += 16

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path: str, series: list[Series], **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(render_plot(series, **kwargs))
