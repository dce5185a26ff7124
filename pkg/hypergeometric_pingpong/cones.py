import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Optional, Sequence, Union

from .base import DegenerateConeError, DimensionMismatchError, RationalLike, rat2str, to_rat
from .exact import RatMat, RatVec, rank

logger = logging.getLogger(__name__)

VectorLike = Union[RatVec, Sequence[RationalLike]]


class Membership(Enum):
    INTERIOR_PLUS = "interior_plus"
    INTERIOR_MINUS = "interior_minus"
    BOUNDARY_PLUS = "boundary_plus"
    BOUNDARY_MINUS = "boundary_minus"
    OUTSIDE = "outside"

    @property
    def in_open_union(self) -> bool:
        """Inside X = C ∪ -C for the open cone."""
        return self in (Membership.INTERIOR_PLUS, Membership.INTERIOR_MINUS)

    @property
    def in_closed_union(self) -> bool:
        return self is not Membership.OUTSIDE

    @property
    def sign(self) -> int:
        if self in (Membership.INTERIOR_PLUS, Membership.BOUNDARY_PLUS):
            return 1
        if self in (Membership.INTERIOR_MINUS, Membership.BOUNDARY_MINUS):
            return -1
        return 0


def _as_vec(value: VectorLike) -> RatVec:
    return value if isinstance(value, RatVec) else RatVec(value)


class SimplicialCone:
    """
    Cone of positive (open) or nonnegative (closed) combinations of linearly independent generators.

    Two cones are equal when their generators agree up to order and positive rescaling.
    """

    def __init__(self, generators: Iterable[VectorLike], closed: bool = False):
        gens = tuple(_as_vec(g) for g in generators)
        if not gens:
            raise DegenerateConeError("A cone needs at least one generator")
        if len({g.dim for g in gens}) != 1:
            raise DimensionMismatchError("Cone generators have different dimensions")
        if any(g.is_zero() for g in gens):
            raise DegenerateConeError("Cone generators must be nonzero")
        if len(gens) > gens[0].dim or rank(RatMat.from_columns(gens)) != len(gens):
            raise DegenerateConeError("Cone generators are linearly dependent")
        self.generators = gens
        self.closed = closed

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def is_full_dimensional(self) -> bool:
        return self.k == self.dim

    @cached_property
    def basis(self) -> RatMat:
        return RatMat.from_columns(self.generators)

    @cached_property
    def basis_inverse(self) -> RatMat:
        self.require_full_dimensional()
        return self.basis.inverse()

    def require_full_dimensional(self) -> None:
        if not self.is_full_dimensional:
            raise DegenerateConeError(f"Cone has {self.k} generators in dimension {self.dim}")

    @cached_property
    def _key(self) -> frozenset:
        return frozenset(g.primitive() for g in self.generators)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialCone):
            return NotImplemented
        return self.closed == other.closed and self._key == other._key

    def __hash__(self) -> int:
        return hash((self.closed, self._key))

    def __neg__(self) -> "SimplicialCone":
        return SimplicialCone([-g for g in self.generators], closed=self.closed)

    def __repr__(self) -> str:
        gens = "; ".join(",".join(g.to_strings()) for g in self.generators)
        return f"SimplicialCone({gens}{', closed' if self.closed else ''})"

    def closure(self) -> "SimplicialCone":
        return SimplicialCone(self.generators, closed=True)

    def has_generator_direction(self, direction: RatVec) -> Optional[int]:
        """
        :return: index of a generator that is a positive multiple of direction, or None
        """
        for index, g in enumerate(self.generators):
            if g.positive_multiple_of(direction) is not None:
                return index
        return None

    def contains(self, p: VectorLike) -> bool:
        state = membership(self, p)
        if self.closed:
            return state in (Membership.INTERIOR_PLUS, Membership.BOUNDARY_PLUS)
        return state is Membership.INTERIOR_PLUS

    def to_dict(self) -> dict:
        return {"generators": [g.to_strings() for g in self.generators], "closed": self.closed}


def coords(C: SimplicialCone, p: VectorLike) -> RatVec:
    """
    Coordinates (a_1, ..., a_n) of p in the generator basis of C, i.e. p = sum a_i g_i.
    """
    return C.basis_inverse @ _as_vec(p)


def membership(C: SimplicialCone, p: VectorLike) -> Membership:
    """
    Position of p relative to X = C ∪ -C, read off the signs of its cone coordinates. The origin is BOUNDARY_PLUS.
    """
    a = coords(C, p)
    if all(x > 0 for x in a):
        return Membership.INTERIOR_PLUS
    if all(x < 0 for x in a):
        return Membership.INTERIOR_MINUS
    if all(x >= 0 for x in a):
        return Membership.BOUNDARY_PLUS
    if all(x <= 0 for x in a):
        return Membership.BOUNDARY_MINUS
    return Membership.OUTSIDE


def cone_matrix(C: SimplicialCone, M: RatMat, source: Optional[SimplicialCone] = None) -> RatMat:
    """
    Matrix of M in cone coordinates: B_C^-1 M B_source, with source defaulting to C.

    :param C: target cone
    :param M: linear map
    :param source: cone whose coordinates are fed in
    """
    source = source or C
    if M.shape != (C.dim, source.dim):
        raise DimensionMismatchError(f"Map of shape {M.shape} does not fit cones in dimension {C.dim}")
    source.require_full_dimensional()
    return C.basis_inverse @ M @ source.basis


class OrthantMapKind(Enum):
    MAPS_INTO_PLUS = "maps_into_plus"
    MAPS_INTO_MINUS = "maps_into_minus"
    DISJOINT_CERTIFICATE = "disjoint_certificate"
    CERTIFIED_DISJOINT = "certified_disjoint"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class OrthantMapClass:
    """
    How A moves the open positive orthant O relative to +-O.

    Row indices are 0-based. An OVERLAP carries x > 0 with A x in ``sign`` * O.
    """

    kind: OrthantMapKind
    row_plus: Optional[int] = None
    row_minus: Optional[int] = None
    witness: Optional[RatVec] = None
    sign: Optional[int] = None

    @property
    def maps_into(self) -> bool:
        return self.kind in (OrthantMapKind.MAPS_INTO_PLUS, OrthantMapKind.MAPS_INTO_MINUS)

    @property
    def disjoint(self) -> bool:
        return self.kind in (OrthantMapKind.DISJOINT_CERTIFICATE, OrthantMapKind.CERTIFIED_DISJOINT)

    def to_dict(self) -> dict:
        data = {"kind": self.kind.value}
        if self.kind is OrthantMapKind.DISJOINT_CERTIFICATE:
            data.update(row_plus=self.row_plus, row_minus=self.row_minus)
        if self.kind is OrthantMapKind.OVERLAP:
            data.update(witness=self.witness.to_strings(), sign=self.sign)
        return data


@dataclass(frozen=True)
class LinearInequality:
    """
    coefficients . x + constant > 0 when strict, >= 0 otherwise.
    """

    coefficients: tuple[Fraction, ...]
    constant: Fraction = Fraction(0)
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(to_rat(c) for c in self.coefficients))
        object.__setattr__(self, "constant", to_rat(self.constant))

    @classmethod
    def positive(cls, dim: int, index: int) -> "LinearInequality":
        """x_index > 0"""
        return cls(tuple(Fraction(int(i == index)) for i in range(dim)))

    @classmethod
    def from_row(cls, row: RatVec, sign: int = 1, strict: bool = True) -> "LinearInequality":
        """sign * (row . x) > 0 (or >= 0)"""
        return cls(tuple(sign * c for c in row), Fraction(0), strict)

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def evaluate(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.coefficients, x)), self.constant)

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        value = self.evaluate(x)
        return value > 0 if self.strict else value >= 0

    def normalized(self) -> "LinearInequality":
        """
        Positive rescaling to coprime integer coefficients and constant.
        """
        values = self.coefficients + (self.constant,)
        lcm = reduce(math.lcm, (v.denominator for v in values), 1)
        integers = [int(v * lcm) for v in values]
        gcd = reduce(math.gcd, (abs(i) for i in integers), 0) or 1
        scaled = [Fraction(i, gcd) for i in integers]
        return LinearInequality(tuple(scaled[:-1]), scaled[-1], self.strict)

    def __str__(self) -> str:
        terms = " + ".join(f"{rat2str(c)}*x{i}" for i, c in enumerate(self.coefficients) if c)
        return f"{terms or '0'} + {rat2str(self.constant)} {'>' if self.strict else '>='} 0"


def _normalize_system(system: Iterable[LinearInequality]) -> Optional[list[LinearInequality]]:
    """
    Drop trivially true rows and duplicates; None if some row is a false constant inequality.
    """
    kept = {}
    for ineq in system:
        if all(c == 0 for c in ineq.coefficients):
            if not ineq.satisfied_by(()):
                return None
            continue
        ineq = ineq.normalized()
        key = (ineq.coefficients, ineq.constant)
        kept[key] = kept.get(key, False) or ineq.strict
    return [LinearInequality(c, k, s) for (c, k), s in kept.items()]


def _eliminate(system: list[LinearInequality], var: int) -> Optional[list[LinearInequality]]:
    z = [i for i in system if i.coefficients[var] == 0]
    p = [i for i in system if i.coefficients[var] > 0]
    n = [i for i in system if i.coefficients[var] < 0]
    combined = list(z)
    for pos in p:
        for neg in n:
            a, b = pos.coefficients[var], -neg.coefficients[var]
            combined.append(
                LinearInequality(
                    tuple(b * cp + a * cn for cp, cn in zip(pos.coefficients, neg.coefficients)),
                    b * pos.constant + a * neg.constant,
                    pos.strict or neg.strict,
                )
            )
    logger.debug("Eliminated x%d: z=%d, p=%d, n=%d -> %d rows", var, len(z), len(p), len(n), len(combined))
    return _normalize_system(combined)


def _choose_value(system: list[LinearInequality], var: int, point: list[Fraction]) -> Fraction:
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for ineq in system:
        c = ineq.coefficients[var]
        if c == 0:
            continue
        rest = ineq.constant + sum((ineq.coefficients[j] * point[j] for j in range(var)), Fraction(0))
        bound = -rest / c
        if c > 0 and (lo is None or bound > lo or (bound == lo and ineq.strict)):
            lo, lo_strict = bound, ineq.strict
        if c < 0 and (hi is None or bound < hi or (bound == hi and ineq.strict)):
            hi, hi_strict = bound, ineq.strict
    if lo is None and hi is None:
        return Fraction(0)
    if hi is None:
        return Fraction(math.floor(lo) + 1)
    if lo is None:
        return Fraction(math.ceil(hi) - 1)
    candidate = Fraction(math.floor(lo) + 1)
    if candidate < hi or (candidate == hi and not hi_strict):
        return candidate
    if lo == hi:
        return lo
    return (lo + hi) / 2


def strict_feasible(system: Sequence[LinearInequality]) -> Optional[RatVec]:
    """
    Exact Fourier-Motzkin feasibility for a mix of strict and non-strict inequalities.

    Variables are eliminated last to first; a witness is then rebuilt first to last, preferring small integers.

    :return: a point satisfying every inequality, or None if the system is infeasible
    """
    if not system:
        raise ValueError("Empty system has no dimension")
    dim = system[0].dim
    if any(i.dim != dim for i in system):
        raise DimensionMismatchError("Inequalities have different dimensions")
    current = _normalize_system(system)
    if current is None:
        return None
    stages = []
    for var in reversed(range(dim)):
        stages.append(current)
        current = _eliminate(current, var)
        if current is None:
            return None
    point = [Fraction(0)] * dim
    for var in range(dim):
        point[var] = _choose_value(stages[dim - 1 - var], var, point)
    witness = RatVec(point)
    if not all(i.satisfied_by(witness) for i in system):
        raise ArithmeticError(f"Back substitution produced {witness!r}, which violates the system")
    return witness


def positive_orthant(dim: int) -> list[LinearInequality]:
    return [LinearInequality.positive(dim, i) for i in range(dim)]


def _image_in_orthant(A: RatMat, sign: int) -> list[LinearInequality]:
    """x > 0 and sign * A x > 0"""
    return positive_orthant(A.cols) + [LinearInequality.from_row(A.row(i), sign) for i in range(A.rows)]


def row_pair_certificate(A: RatMat) -> Optional[tuple[int, int]]:
    """
    First nonzero row that is entrywise >= 0 and first nonzero row that is entrywise <= 0.
    """
    rows = [A.row(i) for i in range(A.rows)]
    plus = next((i for i, r in enumerate(rows) if not r.is_zero() and all(e >= 0 for e in r)), None)
    minus = next((i for i, r in enumerate(rows) if not r.is_zero() and all(e <= 0 for e in r)), None)
    if plus is None or minus is None:
        return None
    return plus, minus


def maps_into_orthant(A: RatMat, sign: int) -> bool:
    rows = [A.row(i) for i in range(A.rows)]
    return all(not r.is_zero() and all(sign * e >= 0 for e in r) for r in rows)


def classify_orthant_map(A: RatMat) -> OrthantMapClass:
    """
    Decide how A moves the open positive orthant O.

    MAPS_INTO_PLUS iff A is entrywise >= 0 with no zero row (symmetrically for minus). Otherwise a row pair
    certificate is tried, and Fourier-Motzkin decides the rest: either some x > 0 lands in +-O (OVERLAP) or
    A O misses +-O (CERTIFIED_DISJOINT).
    """
    if not A.is_square():
        raise DimensionMismatchError(f"Cone-coordinate matrices are square, got {A.shape}")
    if maps_into_orthant(A, 1):
        return OrthantMapClass(OrthantMapKind.MAPS_INTO_PLUS)
    if maps_into_orthant(A, -1):
        return OrthantMapClass(OrthantMapKind.MAPS_INTO_MINUS)
    certificate = row_pair_certificate(A)
    if certificate is not None:
        return OrthantMapClass(OrthantMapKind.DISJOINT_CERTIFICATE, row_plus=certificate[0], row_minus=certificate[1])
    for sign in (1, -1):
        witness = strict_feasible(_image_in_orthant(A, sign))
        if witness is not None:
            return OrthantMapClass(OrthantMapKind.OVERLAP, witness=witness, sign=sign)
    logger.debug("Disjointness certified by elimination for %r", A)
    return OrthantMapClass(OrthantMapKind.CERTIFIED_DISJOINT)


def escape_witness(A: RatMat) -> Optional[RatVec]:
    """
    Some x > 0 whose image A x is not in +-O, or None when A maps O into +O or -O.

    Mixed strict signs are looked for first, then a vanishing or weakly mixed coordinate pair.
    """
    if maps_into_orthant(A, 1) or maps_into_orthant(A, -1):
        return None
    dim = A.cols
    rows = [A.row(i) for i in range(A.rows)]
    for strict in (True, False):
        for i, ri in enumerate(rows):
            for j, rj in enumerate(rows):
                if i == j and strict:
                    continue
                system = positive_orthant(dim) + [
                    LinearInequality.from_row(ri, 1, strict),
                    LinearInequality.from_row(rj, -1, strict),
                ]
                witness = strict_feasible(system)
                if witness is not None:
                    return witness
    raise ArithmeticError(f"No escaping point found for {A!r}")
