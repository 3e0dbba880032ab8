"""Bare SVG rendering of contour polylines.

The viewBox is in axis units; a y-flip keeps larger y at the top.  Numbers
carry 6 significant digits.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

from .contours import ContourSet


def _g(v: float) -> str:
    return format(float(v), ".6g")


def level_class(level: float) -> str:
    return "level-" + _g(level).replace(".", "_").replace("-", "m").replace("+", "")


def contours_svg(cs: ContourSet, xlim: tuple[float, float], ylim: tuple[float, float],
                 title: str = "") -> str:
    x0, x1 = xlim
    y0, y1 = ylim
    w, h = x1 - x0, y1 - y0
    stroke = _g(max(w, h) / 400.0)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_g(x0)} {_g(-y1)} {_g(w)} {_g(h)}"'
        ' preserveAspectRatio="none" width="600" height="600">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="{stroke}">')
    for level in cs.levels:
        cls = quoteattr(level_class(level))
        for line in cs.polylines[level]:
            d = "M" + " L".join(f"{_g(a)},{_g(b)}" for a, b in line)
            out.append(f'<path class={cls} data-level="{_g(level)}" d="{d}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
