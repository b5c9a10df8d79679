"""SVG figures of packings, conductance networks and vertex fields.

Output is a plain string built with fixed-precision formatting, so the same
inputs always give byte-identical documents.  The plane's y axis points up
and the SVG's points down; every point ``(x, y)`` is drawn at screen
``(x - xmin, ymax - y)`` (times the scale), which keeps counterclockwise
flowers counterclockwise on screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .complex import Complex
from .conductance import ConductanceNetwork, radical_center
from .packing import Packing

__all__ = ["SvgStyle", "emit_svg", "field_color", "EDGE_PALETTE"]

# light to dark, one per conductance quantile bin
EDGE_PALETTE = ("#fde725", "#5ec962", "#21918c", "#3b528b", "#440154")

# two-stop diverging ramp for vertex fields
_LOW = (49, 54, 149)
_MID = (255, 255, 191)
_HIGH = (165, 0, 38)


@dataclass(frozen=True)
class SvgStyle:
    width: int = 640
    margin: float = 16.0
    circle_stroke: str = "#222222"
    stroke_width: float = 0.75
    fill: str = "none"
    edge_width: float = 1.25
    unit_circle: bool | None = None  # default: draw it for disc packings
    ortho_face: tuple[int, int, int] | None = None
    legend: bool = True
    precision: int = 4


def field_color(t: float) -> str:
    """Hex color for ``t`` in ``[0, 1]`` on a blue-yellow-red ramp."""
    t = min(max(float(t), 0.0), 1.0)
    lo, hi, s = (_LOW, _MID, 2 * t) if t <= 0.5 else (_MID, _HIGH, 2 * t - 1)
    rgb = (round(a + (b - a) * s) for a, b in zip(lo, hi))
    return "#" + "".join(f"{c:02x}" for c in rgb)


class _Canvas:
    def __init__(self, xmin: float, xmax: float, ymin: float, ymax: float, style: SvgStyle):
        span = max(xmax - xmin, ymax - ymin, 1e-300)
        self.scale = (style.width - 2 * style.margin) / span
        self.xmin, self.ymax = xmin, ymax
        self.m = style.margin
        self.p = style.precision
        self.width = style.width
        self.height = 2 * style.margin + (ymax - ymin) * self.scale

    def num(self, x: float) -> str:
        s = f"{x:.{self.p}f}"
        return "0" if s.strip("-0.") == "" else s

    def x(self, x: float) -> str:
        return self.num(self.m + (x - self.xmin) * self.scale)

    def y(self, y: float) -> str:
        return self.num(self.m + (self.ymax - y) * self.scale)

    def r(self, r: float) -> str:
        return self.num(r * self.scale)


def _bounds(packing: Packing, unit: bool) -> tuple[float, float, float, float]:
    z, r = packing.centers, packing.radii
    xmin, xmax = float(np.min(z.real - r)), float(np.max(z.real + r))
    ymin, ymax = float(np.min(z.imag - r)), float(np.max(z.imag + r))
    if unit:
        xmin, ymin = min(xmin, -1.0), min(ymin, -1.0)
        xmax, ymax = max(xmax, 1.0), max(ymax, 1.0)
    return xmin, xmax, ymin, ymax


def _quantile_bins(values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    cuts = np.quantile(values, np.linspace(0, 1, k + 1))
    bins = np.clip(np.searchsorted(cuts[1:-1], values, side="right"), 0, k - 1)
    return bins, cuts


def emit_svg(cx: Complex, packing: Packing, field: Sequence[float] | None = None,
             network: ConductanceNetwork | None = None, style: SvgStyle = SvgStyle()) -> str:
    """Render ``packing`` as an SVG document.

    Parameters
    ----------
    cx, packing
        The complex and a packing of it; one ``<circle>`` is emitted per vertex.
    field
        Optional per-vertex values; circles are filled on a color ramp from
        the field minimum to its maximum and a legend is added.
    network
        Optional conductance network; edges are drawn between centers and
        colored by conductance quintile.
    style
        Figure options.  ``style.ortho_face`` draws, dashed, the circle
        orthogonal to the three circles of that face: centered at their
        radical center, with radius the square root of its power.
    """
    if packing.complex != cx:
        raise ValueError("packing does not realize this complex")
    if network is not None and network.complex != cx:
        raise ValueError("network is for a different complex")
    V = cx.vertex_count
    vals = None
    if field is not None:
        vals = np.asarray(field, dtype=float)
        if vals.shape != (V,) or not np.all(np.isfinite(vals)):
            raise ValueError("field must hold one finite value per vertex")
    unit = packing.geometry == "disc" if style.unit_circle is None else style.unit_circle
    cv = _Canvas(*_bounds(packing, unit), style)
    legend_h = 0.0
    if style.legend and (vals is not None or network is not None):
        legend_h = 22.0 * ((vals is not None) + (network is not None)) + 8.0
    height = cv.height + legend_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" '
        f'height="{cv.num(height)}" viewBox="0 0 {style.width} {cv.num(height)}">',
        f"<!-- y axis flipped: plane point (x, y) is drawn at screen "
        f"({cv.num(style.margin)} + s*(x - xmin), {cv.num(style.margin)} + s*(ymax - y)) "
        f"with s = {cv.num(cv.scale)}, xmin = {cv.num(cv.xmin)}, ymax = {cv.num(cv.ymax)}; "
        f"mathematical orientation is preserved -->",
        f"<!-- {V} vertices, geometry {packing.geometry} -->",
    ]
    if unit:
        out.append(f'<circle cx="{cv.x(0)}" cy="{cv.y(0)}" r="{cv.r(1)}" fill="none" '
                   f'stroke="#888888" stroke-width="{style.stroke_width}" class="unit"/>')

    z, r = packing.centers, packing.radii
    out.append('<g class="circles">')
    lo = hi = 0.0
    if vals is not None:
        lo, hi = float(vals.min()), float(vals.max())
    for v in range(V):
        fill = style.fill
        if vals is not None:
            fill = field_color(0.5 if hi == lo else (vals[v] - lo) / (hi - lo))
        out.append(f'<circle id="v{v}" cx="{cv.x(z[v].real)}" cy="{cv.y(z[v].imag)}" '
                   f'r="{cv.r(r[v])}" fill="{fill}" stroke="{style.circle_stroke}" '
                   f'stroke-width="{style.stroke_width}"/>')
    out.append("</g>")

    cuts = None
    if network is not None:
        bins, cuts = _quantile_bins(network.conductance, len(EDGE_PALETTE))
        out.append('<g class="edges">')
        for (a, b), k in zip(network.edges, bins):
            out.append(f'<line x1="{cv.x(z[a].real)}" y1="{cv.y(z[a].imag)}" '
                       f'x2="{cv.x(z[b].real)}" y2="{cv.y(z[b].imag)}" '
                       f'stroke="{EDGE_PALETTE[k]}" stroke-width="{style.edge_width}"/>')
        out.append("</g>")

    if style.ortho_face is not None:
        a, b, c = style.ortho_face
        if not (b in cx.flowers[a] and c in cx.flowers[a] and c in cx.flowers[b]):
            raise ValueError(f"{style.ortho_face} is not a face")
        rc = radical_center((z[a], r[a]), (z[b], r[b]), (z[c], r[c]))
        power = abs(rc - z[a]) ** 2 - r[a] ** 2
        if power <= 0:
            raise ValueError("radical center lies inside the circles; no orthogonal circle")
        out.append(f'<circle class="orthogonal" cx="{cv.x(rc.real)}" cy="{cv.y(rc.imag)}" '
                   f'r="{cv.r(math.sqrt(power))}" fill="none" stroke="#d62728" '
                   f'stroke-dasharray="4 3" stroke-width="{style.stroke_width}"/>')

    if legend_h:
        out.extend(_legend(cv, cv.height + 4.0, vals is not None, lo, hi, cuts, style))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _legend(cv: _Canvas, top: float, has_field: bool, lo: float, hi: float,
            cuts: np.ndarray | None, style: SvgStyle) -> list[str]:
    out = ['<g class="legend" font-family="sans-serif" font-size="10">']
    y = top
    x0 = style.margin
    if has_field:
        n = 10
        w = (style.width - 2 * style.margin - 120) / n
        for k in range(n):
            out.append(f'<rect x="{cv.num(x0 + k * w)}" y="{cv.num(y)}" width="{cv.num(w)}" '
                       f'height="12" fill="{field_color(k / (n - 1))}"/>')
        out.append(f'<text x="{cv.num(x0 + n * w + 6)}" y="{cv.num(y + 10)}">'
                   f'{escape(f"field {lo:.6g} .. {hi:.6g}")}</text>')
        y += 22.0
    if cuts is not None:
        k = len(EDGE_PALETTE)
        w = (style.width - 2 * style.margin) / k
        for i in range(k):
            out.append(f'<rect x="{cv.num(x0 + i * w)}" y="{cv.num(y)}" width="12" height="12" '
                       f'fill="{EDGE_PALETTE[i]}"/>')
            out.append(f'<text x="{cv.num(x0 + i * w + 16)}" y="{cv.num(y + 10)}">'
                       f'{escape(f"c {cuts[i]:.4g}..{cuts[i + 1]:.4g}")}</text>')
    out.append("</g>")
    return out
