"""Static SVG charts rendered from tabular results.

Charts are batch documents: plain SVG text, no scripts, no timestamps,
no external references. The same input always yields byte-identical
output, which keeps the files diffable and reproducible.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT = 70, 30
MARGIN_TOP, MARGIN_BOTTOM = 46, 56

_AXIS = "#444444"
_GRID = "#dddddd"
_LINE = "#1f5fa6"
_PRE = "#9ecae1"
_POST = "#2166ac"


def _num(x: float) -> str:
    return f"{x:.2f}"


def _svg_open() -> list[str]:
    return [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" '
        'font-family="Helvetica, Arial, sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]


def _title(text: str) -> str:
    return (f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
            f'font-size="15" fill="#222222">{escape(text)}</text>')


def _y_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _plot_area() -> tuple[float, float, float, float]:
    x0 = MARGIN_LEFT
    x1 = WIDTH - MARGIN_RIGHT
    y0 = MARGIN_TOP
    y1 = HEIGHT - MARGIN_BOTTOM
    return x0, x1, y0, y1


def _axes(parts: list[str], ylo: float, yhi: float, y_label: str) -> None:
    x0, x1, y0, y1 = _plot_area()
    for tick in _y_ticks(ylo, yhi):
        py = y1 - (tick - ylo) / (yhi - ylo) * (y1 - y0)
        parts.append(f'<line x1="{_num(x0)}" y1="{_num(py)}" x2="{_num(x1)}" '
                     f'y2="{_num(py)}" stroke="{_GRID}" stroke-width="1"/>')
        parts.append(f'<text x="{_num(x0 - 8)}" y="{_num(py + 4)}" '
                     f'text-anchor="end" fill="{_AXIS}">{tick:.1f}</text>')
    parts.append(f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x0)}" '
                 f'y2="{_num(y1)}" stroke="{_AXIS}" stroke-width="1"/>')
    parts.append(f'<line x1="{_num(x0)}" y1="{_num(y1)}" x2="{_num(x1)}" '
                 f'y2="{_num(y1)}" stroke="{_AXIS}" stroke-width="1"/>')
    parts.append(f'<text x="16" y="{_num((y0 + y1) / 2)}" text-anchor="middle" '
                 f'fill="{_AXIS}" transform="rotate(-90 16 {_num((y0 + y1) / 2)})">'
                 f'{escape(y_label)}</text>')


def band_chart(points: Sequence[tuple[float, float]],
               title: str = "Relative child poverty under shock scaling",
               y_label: str = "poverty rate, %") -> str:
    """Line chart of rate against shock scale with one labeled marker each.

    points are (scale, rate_percent) pairs; they are drawn in ascending
    scale order and each marker carries its percentage as a text label.
    """
    if not points:
        raise ValueError("band chart needs at least one point")
    pts = sorted((float(s), float(r)) for s, r in points)
    x0, x1, y0, y1 = _plot_area()
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = min(xs), max(xs)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    pad = max((max(ys) - min(ys)) * 0.35, 0.3)
    ylo, yhi = min(ys) - pad, max(ys) + pad

    def px(x: float) -> float:
        return x0 + (x - xlo) / (xhi - xlo) * (x1 - x0)

    def py(y: float) -> float:
        return y1 - (y - ylo) / (yhi - ylo) * (y1 - y0)

    parts = _svg_open()
    parts.append(_title(title))
    _axes(parts, ylo, yhi, y_label)
    for x in xs:
        parts.append(f'<text x="{_num(px(x))}" y="{_num(y1 + 18)}" '
                     f'text-anchor="middle" fill="{_AXIS}">{x:g}</text>')
    parts.append(f'<text x="{_num((x0 + x1) / 2)}" y="{_num(HEIGHT - 14)}" '
                 f'text-anchor="middle" fill="{_AXIS}">shock scale</text>')
    if len(pts) > 1:
        path = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in pts)
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="{_LINE}" stroke-width="2"/>')
    for x, y in pts:
        parts.append(f'<circle cx="{_num(px(x))}" cy="{_num(py(y))}" r="4" '
                     f'fill="{_LINE}"/>')
        parts.append(f'<text x="{_num(px(x))}" y="{_num(py(y) - 10)}" '
                     f'text-anchor="middle" fill="#222222" '
                     f'font-weight="bold">{y:.1f}%</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grouped_bar_chart(rows: Sequence[tuple[str, float | None, float | None]],
                      title: str,
                      y_label: str = "poverty rate, %",
                      pre_label: str = "before",
                      post_label: str = "after") -> str | None:
    """Paired before/after bars, one pair per group.

    rows are (group, pre_percent, post_percent); a None value skips that
    bar. Returns None when there is nothing to draw.
    """
    drawable = [(g, pre, post) for g, pre, post in rows
                if pre is not None or post is not None]
    if not drawable:
        return None
    x0, x1, y0, y1 = _plot_area()
    values = [v for _, pre, post in drawable for v in (pre, post)
              if v is not None]
    yhi = max(values) * 1.25 if values and max(values) > 0 else 1.0
    ylo = 0.0

    def py(y: float) -> float:
        return y1 - (y - ylo) / (yhi - ylo) * (y1 - y0)

    parts = _svg_open()
    parts.append(_title(title))
    _axes(parts, ylo, yhi, y_label)

    n = len(drawable)
    slot = (x1 - x0) / n
    bar_w = min(34.0, slot * 0.28)
    for i, (group, pre, post) in enumerate(drawable):
        cx = x0 + slot * (i + 0.5)
        for offset, value, color in ((-bar_w - 2, pre, _PRE),
                                     (2, post, _POST)):
            if value is None:
                continue
            top = py(value)
            parts.append(f'<rect x="{_num(cx + offset)}" y="{_num(top)}" '
                         f'width="{_num(bar_w)}" height="{_num(y1 - top)}" '
                         f'fill="{color}"/>')
            parts.append(f'<text x="{_num(cx + offset + bar_w / 2)}" '
                         f'y="{_num(top - 4)}" text-anchor="middle" '
                         f'font-size="10" fill="#222222">{value:.1f}</text>')
        parts.append(f'<text x="{_num(cx)}" y="{_num(y1 + 18)}" '
                     f'text-anchor="middle" fill="{_AXIS}" font-size="11">'
                     f'{escape(group)}</text>')
    lx = x1 - 150
    parts.append(f'<rect x="{_num(lx)}" y="{_num(y0 + 4)}" width="12" '
                 f'height="12" fill="{_PRE}"/>')
    parts.append(f'<text x="{_num(lx + 18)}" y="{_num(y0 + 14)}" '
                 f'fill="{_AXIS}">{escape(pre_label)}</text>')
    parts.append(f'<rect x="{_num(lx + 76)}" y="{_num(y0 + 4)}" width="12" '
                 f'height="12" fill="{_POST}"/>')
    parts.append(f'<text x="{_num(lx + 94)}" y="{_num(y0 + 14)}" '
                 f'fill="{_AXIS}">{escape(post_label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
