"""Minimal deterministic SVG rendering: line charts, dendrograms, bar plots.

Hand-rolled string assembly with fixed 2-decimal coordinates so that reruns
produce byte-identical files (no timestamps, no library metadata).
"""

from __future__ import annotations

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _open_svg(width: int, height: int) -> list[str]:
    return [
        _HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
    ]


def _text(x: float, y: float, content: str, size: int = 10, anchor: str = "start") -> str:
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
        f'font-size="{size}" text-anchor="{anchor}">{content}</text>\n'
    )


def line_chart(series: dict[str, list[tuple[float, float]]], title: str,
               width: int = 900, height: int = 540) -> str:
    """One polyline per named series over a shared axis box."""
    margin = 60
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    xs = [x for points in series.values() for x, _ in points]
    ys = [y for points in series.values() for _, y in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(x: float) -> float:
        return margin + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return height - margin - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = _open_svg(width, height)
    parts.append(_text(width / 2, 24, title, size=14, anchor="middle"))
    parts.append(
        f'<rect x="{_fmt(margin)}" y="{_fmt(margin)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#444444"/>\n'
    )
    parts.append(_text(margin, height - margin + 16, _fmt(x_lo), size=9))
    parts.append(_text(width - margin, height - margin + 16, _fmt(x_hi), size=9, anchor="end"))
    parts.append(_text(margin - 4, height - margin, _fmt(y_lo), size=9, anchor="end"))
    parts.append(_text(margin - 4, margin + 8, _fmt(y_hi), size=9, anchor="end"))
    for i, name in enumerate(sorted(series)):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(
            f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in sorted(series[name])
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>\n'
        )
        last_x, last_y = sorted(series[name])[-1]
        parts.append(_text(sx(last_x) + 4, sy(last_y) + 3, name, size=8))
    parts.append("</svg>\n")
    return "".join(parts)


def dendrogram_chart(entities, merges, leaf_order, title: str,
                     width: int = 900, height: int = 540) -> str:
    """Rectangular dendrogram: leaves along the x axis, merge cost upward."""
    margin = 60
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    n = len(entities)
    max_height = max((m.height for m in merges), default=1.0) or 1.0
    x_of: dict[int, float] = {}
    y_of: dict[int, float] = {}
    leaf_index = {name: idx for idx, name in enumerate(leaf_order)}
    for i, name in enumerate(entities):
        x_of[i] = margin + (leaf_index[name] + 0.5) / n * plot_w
        y_of[i] = height - margin

    def sy(h: float) -> float:
        return height - margin - h / max_height * plot_h

    parts = _open_svg(width, height)
    parts.append(_text(width / 2, 24, title, size=14, anchor="middle"))
    for step, merge in enumerate(merges):
        y = sy(merge.height)
        xl, xr = x_of[merge.left], x_of[merge.right]
        yl, yr = y_of[merge.left], y_of[merge.right]
        parts.append(
            f'<path d="M {_fmt(xl)} {_fmt(yl)} L {_fmt(xl)} {_fmt(y)} '
            f'L {_fmt(xr)} {_fmt(y)} L {_fmt(xr)} {_fmt(yr)}" '
            f'fill="none" stroke="#1f77b4" stroke-width="1.2"/>\n'
        )
        node = n + step
        x_of[node] = (xl + xr) / 2
        y_of[node] = y
    for name in leaf_order:
        x = margin + (leaf_index[name] + 0.5) / n * plot_w
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(height - margin + 14)}" font-family="sans-serif" '
            f'font-size="8" text-anchor="middle">{name}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def bar_chart(rows: list[tuple[str, int, float]], title: str,
              width: int = 700, height_per_bar: int = 14) -> str:
    """Horizontal silhouette bars, one row per (entity, cluster, width)."""
    margin = 60
    height = 2 * margin + height_per_bar * len(rows)
    plot_w = width - 2 * margin
    lo = min(0.0, min((w for _, _, w in rows), default=0.0))
    hi = max(1e-9, max((w for _, _, w in rows), default=1.0))

    def sx(value: float) -> float:
        return margin + (value - lo) / (hi - lo) * plot_w

    parts = _open_svg(width, height)
    parts.append(_text(width / 2, 24, title, size=14, anchor="middle"))
    zero_x = sx(0.0)
    parts.append(
        f'<line x1="{_fmt(zero_x)}" y1="{_fmt(margin)}" x2="{_fmt(zero_x)}" '
        f'y2="{_fmt(height - margin)}" stroke="#444444" stroke-width="1"/>\n'
    )
    for row_idx, (entity, cluster, value) in enumerate(rows):
        y = margin + row_idx * height_per_bar
        color = PALETTE[(cluster - 1) % len(PALETTE)]
        x0, x1 = sorted((zero_x, sx(value)))
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y)}" width="{_fmt(max(x1 - x0, 0.1))}" '
            f'height="{_fmt(height_per_bar - 3)}" fill="{color}"/>\n'
        )
        parts.append(_text(margin - 4, y + height_per_bar - 5, entity, size=8, anchor="end"))
    parts.append("</svg>\n")
    return "".join(parts)
