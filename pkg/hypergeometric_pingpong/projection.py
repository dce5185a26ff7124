import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import pandas as pd
import sympy

from .base import (
    DEFAULT_CIRCLE_DIRECTIONS,
    DEFAULT_FIGURE_STEPS,
    DEFAULT_OBSTRUCTION_HIGH,
    DEFAULT_OBSTRUCTION_LOW,
    DEFAULT_OBSTRUCTION_STEP,
    DEFAULT_SVG_DIGITS,
    DimensionMismatchError,
    EmptyGridError,
    OnProjectionHorizonError,
    RationalLike,
    ThetaZeroError,
    TPoleHitError,
    rat2str,
    rational_range,
    to_rat,
)
from .exact import RatMat, RatVec, solve, sympy_to_rat
from .group import HypergeometricGroup
from .svg import SvgCanvas
from .words import Factor, Word

logger = logging.getLogger(__name__)

a_sym, b_sym = sympy.symbols("a b")
x_sym, y_sym, z_sym = sympy.symbols("x y z")
t_sym = sympy.Symbol("t")
lam1, lam2 = sympy.symbols("lambda1 lambda2")

PLANE_MAPS = ("R", "R^-1", "T")
FIGURES = ("fig1", "fig2", "fig34")
FORMATS = ("svg", "csv")


@dataclass(frozen=True)
class PlanePoint:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", to_rat(self.a))
        object.__setattr__(self, "b", to_rat(self.b))

    def __iter__(self):
        return iter((self.a, self.b))

    def __add__(self, other: "PlanePoint") -> "PlanePoint":
        return PlanePoint(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "PlanePoint") -> "PlanePoint":
        return PlanePoint(self.a - other.a, self.b - other.b)

    def __str__(self) -> str:
        return f"({rat2str(self.a)}, {rat2str(self.b)})"

    @property
    def norm_squared(self) -> Fraction:
        return self.a**2 + self.b**2

    @property
    def on_unit_circle(self) -> bool:
        return self.norm_squared == 1

    def to_vec(self) -> RatVec:
        return RatVec((self.a, self.b))

    def to_strings(self) -> list[str]:
        return [rat2str(self.a), rat2str(self.b)]


def phi(s: RatVec) -> Fraction:
    if s.dim != 3:
        raise DimensionMismatchError(f"The chart lives in dimension 3, got {s.dim}")
    x, y, z = s
    return x - y + z


def project(s: RatVec) -> PlanePoint:
    denominator = phi(s)
    if denominator == 0:
        raise OnProjectionHorizonError(f"{s!r} lies on the plane x - y + z = 0")
    x, y, z = s
    return PlanePoint(-2 * (x - z) / denominator, -2 * y / denominator)


def unproject(p: PlanePoint) -> RatVec:
    """
    The representative with φ = 1.
    """
    a, b = p
    return RatVec((-a / 4 - b / 4 + Fraction(1, 2), -b / 2, a / 4 - b / 4 + Fraction(1, 2)))


def act2d(g: str, p: PlanePoint) -> PlanePoint:
    a, b = p
    if g == "R":
        return PlanePoint(b, -a)
    if g == "R^-1":
        return PlanePoint(-b, a)
    if g == "T":
        d = 2 * a + 2 * b - 3
        if d == 0:
            raise TPoleHitError(f"{p} lies on the line 2a + 2b = 3")
        return PlanePoint((2 * a + b - 2) / d, (a + 2 * b - 2) / d)
    raise ValueError(f"Invalid plane map {g!r}. Must be one of {PLANE_MAPS}")


def act2d_word(word: Word, p: PlanePoint) -> PlanePoint:
    """
    Apply the word x_1 ... x_k to p, rightmost letter first.
    """
    for letter in reversed(word.letters):
        if letter.factor is Factor.ROTATION:
            for _ in range(letter.exponent % 4):
                p = act2d("R", p)
        elif letter.exponent % 2:
            p = act2d("T", p)
    return p


def reflect(p: PlanePoint) -> PlanePoint:
    """F(a, b) = (b, a)"""
    return PlanePoint(p.b, p.a)


def semiconjugacy_holds(g: str, s: RatVec, group: Optional[HypergeometricGroup] = None) -> bool:
    """
    project(M s) == act2d(M, project(s)) for M the named generator.
    """
    group = group or HypergeometricGroup(3)
    M = {"R": group.R, "R^-1": group.R_inv, "T": group.T}[g]
    return project(M @ s) == act2d(g, project(s))


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: sympy.Expr
    rhs: sympy.Expr

    @property
    def holds(self) -> bool:
        return sympy.cancel(self.lhs - self.rhs) == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": str(self.lhs), "rhs": str(self.rhs), "holds": self.holds}


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)

    def __getitem__(self, name: str) -> IdentityCheck:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {"holds": self.holds, "checks": [c.to_dict() for c in self.checks]}


def _symbolic_map(g: str, a=a_sym, b=b_sym) -> tuple[sympy.Expr, sympy.Expr]:
    if g == "R":
        return b, -a
    if g == "R^-1":
        return -b, a
    d = 2 * a + 2 * b - 3
    return (2 * a + b - 2) / d, (a + 2 * b - 2) / d


def circle_invariance_identity() -> IdentityReport:
    """
    R and T preserve the unit circle: |T(a, b)|^2 - 1 = (a^2 + b^2 - 1)/(2a + 2b - 3)^2 and |R(a, b)|^2 = a^2 + b^2.
    """
    a, b = a_sym, b_sym
    circle = a**2 + b**2 - 1
    ta, tb = _symbolic_map("T")
    ra, rb = _symbolic_map("R")
    return IdentityReport(
        (
            IdentityCheck(
                "numerator_identity",
                sympy.expand((2 * a + b - 2) ** 2 + (a + 2 * b - 2) ** 2 - (2 * a + 2 * b - 3) ** 2),
                sympy.expand(circle),
            ),
            IdentityCheck("t_norm", ta**2 + tb**2 - 1, circle / (2 * a + 2 * b - 3) ** 2),
            IdentityCheck("r_norm", ra**2 + rb**2, a**2 + b**2),
        )
    )


def quadric(s: Sequence) -> sympy.Expr:
    """4(x - z)^2 + 4y^2 - (x - y + z)^2; zero exactly on the surface S."""
    x, y, z = s
    return 4 * (x - z) ** 2 + 4 * y**2 - (x - y + z) ** 2


def quadric_membership(s: RatVec) -> bool:
    if s.dim != 3:
        raise DimensionMismatchError(f"The quadric lives in dimension 3, got {s.dim}")
    return quadric(tuple(s)) == 0


def quadric_invariance(group: Optional[HypergeometricGroup] = None) -> IdentityReport:
    """
    The quadric form is preserved by R and T, and φ(T s) = (2a + 2b - 3) φ(s) on the chart.
    """
    group = group or HypergeometricGroup(3)
    s = sympy.Matrix([x_sym, y_sym, z_sym])
    base = quadric(tuple(s))
    rs = group.R.to_sympy() * s
    ts = group.T.to_sympy() * s
    chart = unproject_symbolic(a_sym, b_sym)
    t_chart = group.T.to_sympy() * chart
    return IdentityReport(
        (
            IdentityCheck("quadric_r", sympy.expand(quadric(tuple(rs))), sympy.expand(base)),
            IdentityCheck("quadric_t", sympy.expand(quadric(tuple(ts))), sympy.expand(base)),
            IdentityCheck("phi_t", sympy.expand(t_chart[0] - t_chart[1] + t_chart[2]), 2 * a_sym + 2 * b_sym - 3),
        )
    )


def unproject_symbolic(a, b) -> sympy.Matrix:
    half = sympy.Rational(1, 2)
    return sympy.Matrix([-a / 4 - b / 4 + half, -b / 2, a / 4 - b / 4 + half])


def reflection_identities() -> IdentityReport:
    """F R F = R^-1 and F T F = T for F(a, b) = (b, a)."""
    checks = []
    for g, expected in (("R", "R^-1"), ("T", "T")):
        fa, fb = _symbolic_map(g, b_sym, a_sym)
        conj = (fb, fa)
        target = _symbolic_map(expected)
        checks.append(IdentityCheck(f"f_{g}_f_a", conj[0], target[0]))
        checks.append(IdentityCheck(f"f_{g}_f_b", conj[1], target[1]))
    return IdentityReport(tuple(checks))


@dataclass(frozen=True)
class Q1Q2Report:
    lam1: Fraction
    lam2: Fraction
    theta: Fraction
    s: PlanePoint
    rs: PlanePoint
    trs: PlanePoint
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    reflected_point: PlanePoint
    reflected_image: PlanePoint

    def closed_forms(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        l1, l2, theta = self.lam1, self.lam2, self.theta
        return (
            (l1 - 1) / theta,
            2 * (l1 + l2) ** 2 / theta,
            (l1 - 1) / theta,
            -2 * (l2**2 + l1 + 3 * l2 + 1) / theta,
        )

    @property
    def matches_closed_forms(self) -> bool:
        return (self.a, self.b, self.c, self.d) == self.closed_forms()

    @property
    def opposite_signs(self) -> bool:
        """b and d cannot both be >= 0, so TRs is outside the closed triangle X'."""
        return self.b * self.d < 0

    @property
    def reflection_consistent(self) -> bool:
        return self.reflected_image == reflect(self.trs)

    def to_dict(self) -> dict:
        return {
            "lambda1": rat2str(self.lam1),
            "lambda2": rat2str(self.lam2),
            "theta": rat2str(self.theta),
            "s": self.s.to_strings(),
            "trs": self.trs.to_strings(),
            "abcd": [rat2str(v) for v in (self.a, self.b, self.c, self.d)],
            "matches_closed_forms": self.matches_closed_forms,
            "opposite_signs": self.opposite_signs,
            "reflection_consistent": self.reflection_consistent,
        }


def q1q2_obstruction(lam1_value: RationalLike, lam2_value: RationalLike) -> Q1Q2Report:
    """
    For s = λ1 (0, 1) + λ2 (1, 1) + (1, 1) in the closed cone Q1 (minus its apex), write TRs in the generators of
    X1' and of X2' and return the four coefficients. For s in Q2 the reflected point F s is sent by TR^-1 to F(TRs).
    """
    l1, l2 = to_rat(lam1_value), to_rat(lam2_value)
    if l1 < 0 or l2 < 0:
        raise ValueError("λ1 and λ2 must be nonnegative")
    if l1 == 0 and l2 == 0:
        raise ValueError("λ1 and λ2 are both zero, s is the apex (1, 1)")
    theta = (2 * l1 - 3) * (l1 + 2 * l2 + 1)
    if theta == 0:
        raise ThetaZeroError(f"θ = 0 at λ1 = {rat2str(l1)}")
    s = PlanePoint(l2 + 1, l1 + l2 + 1)
    rs = act2d("R", s)
    trs = act2d("T", rs)
    p, q = PlanePoint(0, 1), PlanePoint(1, 0)
    a, b = solve(RatMat.from_columns([(s - p).to_vec(), RatVec((1, -1))]), (trs - p).to_vec())
    c, d = solve(RatMat.from_columns([(s - q).to_vec(), RatVec((-1, 1))]), (trs - q).to_vec())
    reflected = reflect(s)
    reflected_image = act2d("T", act2d("R^-1", reflected))
    return Q1Q2Report(l1, l2, theta, s, rs, trs, a, b, c, d, reflected, reflected_image)


def q1q2_scan(
    low: RationalLike = DEFAULT_OBSTRUCTION_LOW,
    high: RationalLike = DEFAULT_OBSTRUCTION_HIGH,
    step: RationalLike = DEFAULT_OBSTRUCTION_STEP,
) -> list[Q1Q2Report]:
    """
    q1q2_obstruction over the square grid of (λ1, λ2), skipping the apex and the θ = 0 line λ1 = 3/2.
    """
    values = rational_range(low, high, step)
    reports = [
        q1q2_obstruction(l1, l2)
        for l1 in values
        for l2 in values
        if (l1, l2) != (0, 0) and l1 != Fraction(3, 2)
    ]
    if not reports:
        raise EmptyGridError("The (λ1, λ2) grid has no admissible points")
    bad = [r for r in reports if not (r.matches_closed_forms and r.opposite_signs and r.reflection_consistent)]
    if bad:
        logger.warning("%d of %d grid points break the obstruction", len(bad), len(reports))
    return reports


def q1q2_symbolic() -> tuple[sympy.Expr, ...]:
    """(a, b, c, d) as rational functions of λ1, λ2."""
    s = (lam2 + 1, lam1 + lam2 + 1)
    rs = _symbolic_map("R", *s)
    trs = _symbolic_map("T", *rs)
    a, b, c, d = sympy.symbols("a b c d")
    first = sympy.solve(
        [a * s[0] + b - trs[0], a * (s[1] - 1) - b + 1 - trs[1]],
        [a, b],
        dict=True,
    )[0]
    second = sympy.solve(
        [c * (s[0] - 1) - d + 1 - trs[0], c * s[1] + d - trs[1]],
        [c, d],
        dict=True,
    )[0]
    return tuple(sympy.factor(e) for e in (first[a], first[b], second[c], second[d]))


def orbit_parametrization(which: str = "TR", group: Optional[HypergeometricGroup] = None) -> tuple[sympy.Expr, ...]:
    """
    Closed form of t -> (TR)^t (1, 0) (which="TR") or t -> (TR^-1)^t (0, 1) (which="TR^-1") from the polynomial
    matrix powers of the unipotents.
    """
    group = group or HypergeometricGroup(3)
    if which == "TR":
        image = group.U_power.to_sympy(t_sym) * group.v.to_sympy()
    elif which == "TR^-1":
        image = group.V_power.to_sympy(t_sym) * group.u.to_sympy()
    else:
        raise ValueError(f"Invalid orbit {which!r}. Must be TR or TR^-1")
    x, y, z = image
    denominator = x - y + z
    return sympy.cancel(-2 * (x - z) / denominator), sympy.cancel(-2 * y / denominator)


@dataclass(frozen=True)
class LimitTangent:
    which: str
    limit_point: tuple
    slope_limit: sympy.Expr

    @property
    def direction(self) -> str:
        if self.slope_limit == 0:
            return "horizontal"
        if self.slope_limit in (sympy.oo, -sympy.oo, sympy.zoo):
            return "vertical"
        return "oblique"

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "limit_point": [str(v) for v in self.limit_point],
            "slope_limit": str(self.slope_limit),
            "direction": self.direction,
        }


def limit_tangent(which: str = "TR", group: Optional[HypergeometricGroup] = None) -> LimitTangent:
    """
    Limit of the orbit point and of the tangent slope db/da as t grows, from the exact parametrization.
    """
    a_t, b_t = orbit_parametrization(which, group)
    slope = sympy.cancel(sympy.diff(b_t, t_sym) / sympy.diff(a_t, t_sym))
    point = (sympy.limit(a_t, t_sym, sympy.oo), sympy.limit(b_t, t_sym, sympy.oo))
    return LimitTangent(which, point, sympy.limit(slope, t_sym, sympy.oo))


def circle_point(m: Fraction) -> PlanePoint:
    """Rational point ((1 - m^2)/(1 + m^2), 2m/(1 + m^2)) of the unit circle."""
    return PlanePoint((1 - m * m) / (1 + m * m), 2 * m / (1 + m * m))


@dataclass
class CircleTableReport:
    samples: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"samples": self.samples, "passed": self.passed, "failures": self.failures}


def circle_table_check(samples: int = DEFAULT_CIRCLE_DIRECTIONS) -> CircleTableReport:
    """
    The smaller table on the unit circle: for points p of the open arc a, b > 0, R^i p (i = 1, 2, 3) leaves the arc
    and T R^i p returns to it, all on the circle.
    """
    report = CircleTableReport(samples=samples)
    for k in range(1, samples + 1):
        p = circle_point(Fraction(k, samples + 1))
        image = p
        for i in range(1, 4):
            image = act2d("R", image)
            back = act2d("T", image)
            ok = (
                image.on_unit_circle
                and back.on_unit_circle
                and not (image.a > 0 and image.b > 0)
                and back.a > 0
                and back.b > 0
            )
            if not ok:
                report.failures.append({"point": p.to_strings(), "rotation": i})
    return report


@dataclass(frozen=True)
class Shape:
    label: str
    points: tuple[PlanePoint, ...]
    closed: bool = True
    color: str = "#000000"


@dataclass
class FigureData:
    name: str
    shapes: list = field(default_factory=list)
    annotations: dict = field(default_factory=dict)
    labels: list = field(default_factory=list)

    def shape(self, label: str) -> Shape:
        return next(s for s in self.shapes if s.label == label)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (s.label, p.a.numerator, p.a.denominator, p.b.numerator, p.b.denominator)
            for s in self.shapes
            for p in s.points
        ]
        return pd.DataFrame(rows, columns=["label", "a_num", "a_den", "b_num", "b_den"])

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    def _canvas(self, digits: int) -> SvgCanvas:
        canvas = SvgCanvas(digits=digits)
        for s in self.shapes:
            points = [(p.a, p.b) for p in s.points]
            if s.closed:
                canvas.polygon(points, color=s.color, fill=s.color, label=s.label)
            else:
                canvas.line(points, color=s.color, label=s.label)
                for x, y in points:
                    canvas.dot(x, y, color=s.color)
        for point, text in self.labels:
            canvas.dot(point.a, point.b)
            canvas.text(point.a, point.b, text)
        return canvas

    def to_svg(self, digits: int = DEFAULT_SVG_DIGITS) -> str:
        return self._canvas(digits).render()

    def save_svg(self, path: str, digits: int = DEFAULT_SVG_DIGITS) -> None:
        self._canvas(digits).save(path)


def _figure_one() -> FigureData:
    triangle = [PlanePoint(0, 1), PlanePoint(1, 0), PlanePoint(1, 1)]
    figure = FigureData("fig1", [Shape("X", tuple(triangle), color="#cc0000")])
    vertices = triangle
    for i in range(1, 4):
        vertices = [act2d("R", p) for p in vertices]
        figure.shapes.append(Shape(f"R{i}X", tuple(vertices), color="#0000cc"))
    for i in range(1, 4):
        rotated = figure.shape(f"R{i}X").points
        figure.shapes.append(Shape(f"TR{i}X", tuple(act2d("T", p) for p in rotated), color="#cc6600"))
    return figure


def _figure_two(steps: int) -> FigureData:
    forward, backward = [], []
    p, q = PlanePoint(1, 0), PlanePoint(0, 1)
    for _ in range(steps):
        p = act2d("T", act2d("R", p))
        q = act2d("T", act2d("R^-1", q))
        forward.append(p)
        backward.append(q)
    figure = FigureData(
        "fig2",
        [
            Shape("TR^t(1,0)", tuple(forward), closed=False, color="#cc0000"),
            Shape("TR^-1^t(0,1)", tuple(backward), closed=False, color="#0000cc"),
        ],
    )
    tangents = [limit_tangent("TR"), limit_tangent("TR^-1")]
    figure.annotations["tangents"] = [t.to_dict() for t in tangents]
    for t in tangents:
        figure.labels.append((PlanePoint(*(sympy_to_rat(v) for v in t.limit_point)), f"{t.which} {t.direction}"))
    return figure


def _wedge(apex: PlanePoint, first: PlanePoint, second: PlanePoint) -> tuple[PlanePoint, ...]:
    return apex, apex + first, apex + first + second, apex + second


def _figure_three_four(s: PlanePoint) -> FigureData:
    p, q, r = PlanePoint(0, 1), PlanePoint(1, 0), PlanePoint(1, 1)
    extent = 2
    return FigureData(
        "fig34",
        [
            Shape("Q1", (r, r + PlanePoint(0, extent), r + PlanePoint(extent, extent)), color="#cc0000"),
            Shape("Q2", (r, r + PlanePoint(extent, 0), r + PlanePoint(extent, extent)), color="#0000cc"),
            Shape("X1'", _wedge(p, s - p, PlanePoint(1, -1)), color="#cc6600"),
            Shape("X2'", _wedge(q, s - q, PlanePoint(-1, 1)), color="#006600"),
            Shape("X'", (p, q, s), color="#000000"),
        ],
        {"s": s.to_strings()},
        [(s, "s")],
    )


def build_figure(which: str, steps: int = DEFAULT_FIGURE_STEPS, s: Optional[PlanePoint] = None) -> FigureData:
    if which == "fig1":
        return _figure_one()
    if which == "fig2":
        return _figure_two(steps)
    if which == "fig34":
        return _figure_three_four(s or PlanePoint(2, 3))
    raise ValueError(f"Invalid figure {which!r}. Must be one of {FIGURES}")


def emit_figures(
    which: str, fmt: str, path: str, steps: int = DEFAULT_FIGURE_STEPS, digits: int = DEFAULT_SVG_DIGITS
) -> FigureData:
    """
    Build the figure from exact geometry and write it as SVG or as the exact CSV point dump.
    """
    if fmt not in FORMATS:
        raise ValueError(f"Invalid format {fmt!r}. Must be one of {FORMATS}")
    figure = build_figure(which, steps)
    if fmt == "svg":
        figure.save_svg(path, digits)
    else:
        figure.to_csv(path)
    logger.info("Wrote %s as %s to %s", which, fmt, path)
    return figure
