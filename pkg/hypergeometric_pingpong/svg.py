from fractions import Fraction
from typing import Iterable, Union

from .base import DEFAULT_SVG_DIGITS

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN"
"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">
<svg width="%(width)s" height="%(height)s" viewBox="%(min_x)s %(min_y)s %(width)s %(height)s" version="1.1"
    xmlns="http://www.w3.org/2000/svg">
<rect x="%(min_x)s" y="%(min_y)s" width="%(width)s" height="%(height)s" style="fill:#ffffff"/>
"""

POSTAMBLE = """\
</svg>
"""

Number = Union[int, Fraction]


class SvgCanvas:
    """
    Collects shapes in plane coordinates (y up) and writes them with y flipped, padded to a bounding box.
    """

    def __init__(self, digits: int = DEFAULT_SVG_DIGITS, stroke_width: Fraction = Fraction(1, 50)):
        self.digits = digits
        self.stroke_width = stroke_width
        self.min_x = None
        self.max_x = None
        self.min_y = None
        self.max_y = None
        self.commands = []

    def fmt(self, value: Number) -> str:
        return f"{float(value):.{self.digits}g}"

    def require(self, x: Number, y: Number) -> None:
        if self.min_x is None:
            self.min_x = self.max_x = x
            self.min_y = self.max_y = y
        else:
            self.min_x = min(self.min_x, x)
            self.max_x = max(self.max_x, x)
            self.min_y = min(self.min_y, y)
            self.max_y = max(self.max_y, y)

    def _points(self, points: Iterable[tuple[Number, Number]]) -> str:
        points = list(points)
        for x, y in points:
            self.require(x, y)
        return " ".join(f"{self.fmt(x)},{self.fmt(-y)}" for x, y in points)

    def polygon(self, points, color: str = "#000000", fill: str = "none", label: str = "") -> None:
        self.commands.append(
            f'<polygon points="{self._points(points)}" style="fill:{fill};fill-opacity:0.3;stroke:{color};'
            f'stroke-width:{self.fmt(self.stroke_width)}"><title>{label}</title></polygon>'
        )

    def line(self, points, color: str = "#000000", label: str = "") -> None:
        self.commands.append(
            f'<polyline points="{self._points(points)}" style="fill:none;stroke:{color};'
            f'stroke-width:{self.fmt(self.stroke_width)}"><title>{label}</title></polyline>'
        )

    def dot(self, x: Number, y: Number, color: str = "#000000", radius: Fraction = Fraction(1, 50)) -> None:
        self.require(x - radius, y - radius)
        self.require(x + radius, y + radius)
        self.commands.append(
            f'<circle cx="{self.fmt(x)}" cy="{self.fmt(-y)}" r="{self.fmt(radius)}" style="fill:{color};stroke:none"/>'
        )

    def text(self, x: Number, y: Number, text: str, color: str = "#666666", size: Fraction = Fraction(1, 8)) -> None:
        self.require(x, y)
        self.commands.append(
            f'<text x="{self.fmt(x)}" y="{self.fmt(-y)}" fill="{color}" font-size="{self.fmt(size)}" '
            f'font-family="monospace">{text}</text>'
        )

    def render(self) -> str:
        if self.min_x is None:
            self.require(0, 0)
        pad = max(self.max_x - self.min_x, self.max_y - self.min_y, 1) / 10
        header = PREAMBLE % {
            "min_x": self.fmt(self.min_x - pad),
            "min_y": self.fmt(-self.max_y - pad),
            "width": self.fmt(self.max_x - self.min_x + 2 * pad),
            "height": self.fmt(self.max_y - self.min_y + 2 * pad),
        }
        return header + "".join(item + "\n" for item in self.commands) + POSTAMBLE

    def save(self, filename: str) -> None:
        with open(filename, "w") as f:
            f.write(self.render())
