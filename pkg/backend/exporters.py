"""
Figure exporters: Wavefront OBJ for 3D viewers and an SVG drawing of a
family projected along a direction. Both are lossy renderings; the
family document remains the exact record.
"""

import logging
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from models import Family
from pipeline import ProjectionSpec

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"
SVG_MARGIN = 20
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")

_environment = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=True,
    undefined=StrictUndefined,
    keep_trailing_newline=True,
)


def decimal_string(q: Fraction, digits: int) -> str:
    """q rounded to the given number of significant digits, in plain notation"""
    with localcontext() as ctx:
        ctx.prec = digits
        value = Decimal(q.numerator) / Decimal(q.denominator)
    return format(value, "f")


def export_obj(family: Family, digits: int = 12) -> str:
    if digits < 1:
        raise ValueError(f"digits must be >= 1, got {digits}")
    lines = [f"# hexfam export, {digits} significant digits"]
    for p in family.point_set:
        lines.append("v " + " ".join(decimal_string(c, digits) for c in p.as_tuple()))
    for polygon in family.polygons:
        lines.append("f " + " ".join(str(i + 1) for i in polygon.vertex_indices))
    logger.debug(f"OBJ export: {len(family.point_set)} vertices, {len(family)} faces")
    return "\n".join(lines) + "\n"


def export_svg(family: Family, projection: ProjectionSpec, size: int = 800) -> str:
    """Polygons drawn in the projection plane, scaled to fit a size x size canvas"""
    if size <= 2 * SVG_MARGIN:
        raise ValueError(f"SVG size must exceed {2 * SVG_MARGIN}, got {size}")

    coords = [projection.image_coordinates(p) for p in family.point_set]
    xs = [c[0] for c in coords] or [0.0]
    ys = [c[1] for c in coords] or [0.0]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = (size - 2 * SVG_MARGIN) / span

    def to_canvas(c):
        # y grows downward on the canvas
        return (round(SVG_MARGIN + (c[0] - min(xs)) * scale, 3),
                round(size - SVG_MARGIN - (c[1] - min(ys)) * scale, 3))

    canvas = [to_canvas(c) for c in coords]
    polygons = []
    for position, polygon in enumerate(family.polygons):
        polygons.append({
            "index": position,
            "vertices": " ".join(str(i) for i in polygon.vertex_indices),
            "points": " ".join(f"{canvas[i][0]},{canvas[i][1]}" for i in polygon.vertex_indices),
            "fill": PALETTE[position % len(PALETTE)],
        })
    points = [{"index": i, "x": x, "y": y} for i, (x, y) in enumerate(canvas)]

    template = _environment.get_template("family.svg.j2")
    return template.render(
        size=size,
        direction=", ".join(projection.direction.to_strings()),
        polygons=polygons,
        points=points,
    )
