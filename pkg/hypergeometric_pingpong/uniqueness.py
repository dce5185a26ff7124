import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

import pandas as pd
import sympy

from .base import (
    DEFAULT_SCAN_HIGH,
    DEFAULT_SCAN_LOW,
    DEFAULT_SCAN_STEP,
    DEFAULT_WORKERS,
    DimensionMismatchError,
    EmptyGridError,
    RationalLike,
    rat2str,
    rational_range,
    to_rat,
)
from .cones import Membership, SimplicialCone, coords, membership
from .exact import MultiPoly, RatMat, RatVec, multipoly, rat_to_sympy, sympy_to_rat
from .group import HypergeometricGroup
from .pingpong import Witness, falsify
from .words import Factor, Word

logger = logging.getLogger(__name__)

t, lam, mu, eta, x, y, z = sympy.symbols("t lambda mu eta x y z")


@lru_cache(maxsize=None)
def _group3() -> HypergeometricGroup:
    return HypergeometricGroup(3)


def eigen_basis(group: Optional[HypergeometricGroup] = None) -> tuple[RatVec, RatVec, RatVec]:
    """u, v, w of the n=3 cone."""
    group = group or _group3()
    return group.default_cone().generators


@dataclass(frozen=True)
class SymbolicCoordinates:
    """
    Cone coordinates as numerator polynomials over a common denominator (η or 1).
    """

    numerators: tuple[MultiPoly, ...]
    denominator: sympy.Expr = sympy.Integer(1)

    def expressions(self) -> tuple[sympy.Expr, ...]:
        return tuple(sympy.cancel(p.as_expr() / self.denominator) for p in self.numerators)

    def substitute(self, values: Mapping[sympy.Symbol, RationalLike]) -> tuple[sympy.Expr, ...]:
        subs = {s: rat_to_sympy(v) for s, v in values.items()}
        return tuple(sympy.cancel(e.subs(subs)) for e in self.expressions())

    def evaluate(self, values: Mapping[sympy.Symbol, RationalLike]) -> tuple[Fraction, ...]:
        return tuple(sympy_to_rat(e) for e in self.substitute(values))


def _basis_matrix(group: HypergeometricGroup, eta_value) -> sympy.Matrix:
    u, v, w = (g.to_sympy() for g in eigen_basis(group))
    return sympy.Matrix.hstack(u, v, lam * u + mu * v + eta_value * w)


def symbolic_coords_TRt_v(group: Optional[HypergeometricGroup] = None) -> SymbolicCoordinates:
    """
    Coordinates (a, b, c) of (TR)^t v in the basis (u, v, λu + μv + ηw), returned as η a, η b, η c over η.
    """
    group = group or _group3()
    B = _basis_matrix(group, eta)
    image = group.U_power.to_sympy(t) * eigen_basis(group)[1].to_sympy()
    solved = B.adjugate() * image / B.det()
    numerators = tuple(multipoly(sympy.cancel(eta * c), t, lam, mu, eta) for c in solved)
    return SymbolicCoordinates(numerators, eta)


def _symbolic_cone_map(group: HypergeometricGroup, M: RatMat) -> SymbolicCoordinates:
    B = _basis_matrix(group, 1)
    A = B.inv() * M.to_sympy() * B
    image = A * sympy.Matrix([x, y, z])
    return SymbolicCoordinates(tuple(multipoly(sympy.cancel(e), x, y, z, lam, mu) for e in image))


def symbolic_coords_TR(group: Optional[HypergeometricGroup] = None) -> SymbolicCoordinates:
    """
    TR q for q = x u + y v + z w' with w' = λu + μv + w, in the same basis.
    """
    group = group or _group3()
    return _symbolic_cone_map(group, group.U)


def symbolic_coords_TRinv(group: Optional[HypergeometricGroup] = None) -> SymbolicCoordinates:
    group = group or _group3()
    return _symbolic_cone_map(group, group.T @ group.R_inv)


def coefficient_of(poly: MultiPoly, symbol: sympy.Symbol) -> sympy.Expr:
    """Coefficient of the first power of symbol, as an expression in the remaining variables."""
    return sympy.expand(poly.as_expr()).coeff(symbol)


def eta_sign_forced(coordinates: Optional[SymbolicCoordinates] = None) -> bool:
    """
    True when, for large t, a is positive while c has the sign of η, so η < 0 puts (TR)^t v outside ±C'.
    """
    coordinates = coordinates or symbolic_coords_TRt_v()
    a_num, _, c_num = coordinates.numerators
    lc_a = sympy.cancel(sympy.Poly(a_num.as_expr(), t).LC() / eta)
    lc_c = sympy.Poly(c_num.as_expr(), t).LC()
    return bool(lc_a.is_positive) and bool(lc_c.is_positive)


@dataclass(frozen=True)
class EtaSignWitness:
    """
    (TR)^t v for the first t with a > 0 when η < 0: its coordinates are mixed, so it lies outside the closed X'.
    """

    t: int
    word: Word
    image: RatVec
    coordinates: RatVec
    image_membership: Membership

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "word": str(self.word),
            "image": self.image.to_strings(),
            "coordinates": self.coordinates.to_strings(),
            "image_membership": self.image_membership.value,
        }


def eta_sign_witness(
    lam_value: RationalLike,
    mu_value: RationalLike,
    eta_value: RationalLike,
    group: Optional[HypergeometricGroup] = None,
) -> Optional[EtaSignWitness]:
    lam_value, mu_value, eta_value = to_rat(lam_value), to_rat(mu_value), to_rat(eta_value)
    if eta_value >= 0:
        return None
    group = group or _group3()
    u, v, w = eigen_basis(group)
    cone = SimplicialCone([u, v, u * lam_value + v * mu_value + w * eta_value])
    steps = max(1, math.floor(2 * lam_value / eta_value) + 1)
    image = group.U_power.evaluate(steps) @ v
    word = Word.reduce([(Factor.INVOLUTION, 1), (Factor.ROTATION, 1)] * steps, group.rotation_order)
    return EtaSignWitness(steps, word, image, coords(cone, image), membership(cone, image))


@dataclass(frozen=True)
class GridSpec:
    """
    Inclusive rational ranges (low, high, step) for λ, μ and η. Points with η = 0 are skipped.
    """

    lam: tuple = (DEFAULT_SCAN_LOW, DEFAULT_SCAN_HIGH, DEFAULT_SCAN_STEP)
    mu: tuple = (DEFAULT_SCAN_LOW, DEFAULT_SCAN_HIGH, DEFAULT_SCAN_STEP)
    eta: tuple = (DEFAULT_SCAN_LOW, DEFAULT_SCAN_HIGH, DEFAULT_SCAN_STEP)

    @classmethod
    def single(cls, lam_value: RationalLike, mu_value: RationalLike, eta_value: RationalLike) -> "GridSpec":
        return cls((lam_value, lam_value, 1), (mu_value, mu_value, 1), (eta_value, eta_value, 1))

    def points(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        lams, mus, etas = (rational_range(*spec) for spec in (self.lam, self.mu, self.eta))
        return [(a, b, c) for a in lams for b in mus for c in etas if c != 0]


@dataclass(frozen=True)
class ScanEntry:
    lam: Fraction
    mu: Fraction
    eta: Fraction
    witness: Optional[Witness] = None
    eta_witness: Optional[EtaSignWitness] = None

    @property
    def survived(self) -> bool:
        return self.witness is None and self.eta_witness is None

    def to_dict(self) -> dict:
        data = {
            "lambda": rat2str(self.lam),
            "mu": rat2str(self.mu),
            "eta": rat2str(self.eta),
            "survived": self.survived,
        }
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        if self.eta_witness is not None:
            data["eta_witness"] = self.eta_witness.to_dict()
        return data


def scan_point(point: tuple[Fraction, Fraction, Fraction]) -> ScanEntry:
    lam_value, mu_value, eta_value = point
    group = _group3()
    u, v, w = eigen_basis(group)
    cone = SimplicialCone([u, v, u * lam_value + v * mu_value + w * eta_value])
    witness = falsify(group.table(cone))
    logger.debug("Scanned (%s, %s, %s): %s", *map(rat2str, point), "falsified" if witness else "survived")
    return ScanEntry(lam_value, mu_value, eta_value, witness, eta_sign_witness(lam_value, mu_value, eta_value, group))


@dataclass
class ObstructionReport:
    eta_sign_forced: bool
    mu_squared_coefficient: sympy.Expr
    lambda_squared_coefficient: sympy.Expr
    entries: list = field(default_factory=list)

    @property
    def survivors(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return [(e.lam, e.mu, e.eta) for e in self.entries if e.survived]

    @property
    def survivors_as_expected(self) -> bool:
        """Survivors are exactly the scanned points with λ = μ = 0 and η > 0."""
        expected = [(e.lam, e.mu, e.eta) for e in self.entries if e.lam == 0 and e.mu == 0 and e.eta > 0]
        return self.survivors == expected

    @property
    def coefficients_match(self) -> bool:
        return (
            sympy.expand(self.mu_squared_coefficient + 4 * mu**2) == 0
            and sympy.expand(self.lambda_squared_coefficient + 4 * lam**2) == 0
        )

    def to_dict(self) -> dict:
        return {
            "eta_sign_forced": self.eta_sign_forced,
            "mu_squared_coefficient": str(self.mu_squared_coefficient),
            "lambda_squared_coefficient": str(self.lambda_squared_coefficient),
            "coefficients_match": self.coefficients_match,
            "points": len(self.entries),
            "survivors": [[rat2str(c) for c in s] for s in self.survivors],
            "survivors_as_expected": self.survivors_as_expected,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "lambda": e.lam,
                "mu": e.mu,
                "eta": e.eta,
                "survived": e.survived,
                "witness_word": str(e.witness.word) if e.witness else None,
                "eta_witness_t": e.eta_witness.t if e.eta_witness else None,
            }
            for e in self.entries
        ]
        return pd.DataFrame(rows, columns=["lambda", "mu", "eta", "survived", "witness_word", "eta_witness_t"])


def uniqueness_scan(grid: Optional[GridSpec] = None, workers: int = DEFAULT_WORKERS) -> ObstructionReport:
    """
    Falsify cone(u, v, λu + μv + ηw) at every grid point and attach the symbolic obstruction coefficients.

    :param grid: parameter ranges, the default grid when omitted
    :param workers: worker processes; 1 scans in-process
    """
    grid = grid or GridSpec()
    points = grid.points()
    if not points:
        raise EmptyGridError("The (λ, μ, η) grid has no points with η != 0")
    logger.info("Scanning %d grid points with %d worker(s)", len(points), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            entries = list(executor.map(scan_point, points, chunksize=max(1, len(points) // (4 * workers))))
    else:
        entries = [scan_point(p) for p in points]
    entries.sort(key=lambda e: (e.lam, e.mu, e.eta))

    tr = symbolic_coords_TR()
    trinv = symbolic_coords_TRinv()
    report = ObstructionReport(
        eta_sign_forced=eta_sign_forced(),
        mu_squared_coefficient=coefficient_of(tr.numerators[1], z),
        lambda_squared_coefficient=coefficient_of(trinv.numerators[0], z),
        entries=entries,
    )
    logger.info("Scan finished: %d survivors out of %d points", len(report.survivors), len(entries))
    return report


@dataclass(frozen=True)
class EigenGeneratorReport:
    u_index: Optional[int]
    u_sign: Optional[int]
    v_index: Optional[int]
    v_sign: Optional[int]

    @property
    def passed(self) -> bool:
        return self.u_index is not None and self.v_index is not None

    def to_dict(self) -> dict:
        return {
            "u_index": self.u_index,
            "u_sign": self.u_sign,
            "v_index": self.v_index,
            "v_sign": self.v_sign,
            "passed": self.passed,
        }


def _find_signed(cone: SimplicialCone, direction: RatVec) -> tuple[Optional[int], Optional[int]]:
    for sign in (1, -1):
        index = cone.has_generator_direction(direction * sign)
        if index is not None:
            return index, sign
    return None, None


def eigen_generator_check(cone: SimplicialCone, group: Optional[HypergeometricGroup] = None) -> EigenGeneratorReport:
    """
    Whether ±u and ±v are generators of the cone up to positive scaling.
    """
    group = group or _group3()
    if cone.dim != group.n:
        raise DimensionMismatchError(f"Cone lives in dimension {cone.dim}, group in {group.n}")
    u_index, u_sign = _find_signed(cone, group.u)
    v_index, v_sign = _find_signed(cone, group.v)
    return EigenGeneratorReport(u_index, u_sign, v_index, v_sign)
