import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np
import sympy

from .base import (
    DimensionMismatchError,
    NotUnipotentError,
    RationalLike,
    SingularMatrixError,
    ZeroVectorError,
    rat2str,
    to_rat,
)

logger = logging.getLogger(__name__)

Rat = Fraction

# Multivariate polynomials over the rationals in named variables
MultiPoly = sympy.Poly
QQ = sympy.QQ

CHARPOLY_VARIABLE = sympy.Symbol("x")


def rat_to_sympy(value: RationalLike) -> sympy.Rational:
    value = to_rat(value)
    return sympy.Rational(value.numerator, value.denominator)


def sympy_to_rat(value) -> Fraction:
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise ValueError(f"Expected an exact rational, got {value}")
    return Fraction(int(value.p), int(value.q))


def multipoly(expr, *gens: sympy.Symbol) -> MultiPoly:
    """
    Build a MultiPoly over QQ in the given generators. ``expr`` must be polynomial in them.
    """
    return sympy.Poly(sympy.expand(expr), *gens, domain=QQ)


class RatVec:
    """
    Immutable vector of Fractions.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[RationalLike]):
        values = tuple(to_rat(e) for e in entries)
        if not values:
            raise DimensionMismatchError("Invalid vector. Dimension must be positive")
        self._entries = values

    @classmethod
    def _wrap(cls, values: Iterable[Fraction]) -> "RatVec":
        vec = cls.__new__(cls)
        vec._entries = tuple(Fraction(v) for v in values)
        return vec

    @classmethod
    def zeros(cls, dim: int) -> "RatVec":
        return cls._wrap([Fraction(0)] * dim)

    @classmethod
    def basis(cls, dim: int, index: int) -> "RatVec":
        return cls._wrap([Fraction(int(i == index)) for i in range(dim)])

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return self._entries

    @property
    def dim(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._entries)

    def __getitem__(self, index):
        return self._entries[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatVec):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"RatVec({', '.join(rat2str(e) for e in self._entries)})"

    def _check_dim(self, other: "RatVec") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(f"Vector dimensions differ: {self.dim} != {other.dim}")

    def __add__(self, other: "RatVec") -> "RatVec":
        self._check_dim(other)
        return RatVec._wrap(a + b for a, b in zip(self._entries, other._entries))

    def __sub__(self, other: "RatVec") -> "RatVec":
        self._check_dim(other)
        return RatVec._wrap(a - b for a, b in zip(self._entries, other._entries))

    def __neg__(self) -> "RatVec":
        return RatVec._wrap(-a for a in self._entries)

    def __mul__(self, scalar: RationalLike) -> "RatVec":
        scalar = to_rat(scalar)
        return RatVec._wrap(a * scalar for a in self._entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar: RationalLike) -> "RatVec":
        scalar = to_rat(scalar)
        if scalar == 0:
            raise ZeroDivisionError("Division of a vector by zero")
        return RatVec._wrap(a / scalar for a in self._entries)

    def dot(self, other: "RatVec") -> Fraction:
        self._check_dim(other)
        return sum((a * b for a, b in zip(self._entries, other._entries)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self._entries)

    def primitive(self) -> "RatVec":
        """
        The positive multiple of this vector with coprime integer entries.
        """
        if self.is_zero():
            raise ZeroVectorError("The zero vector has no primitive representative")
        lcm = reduce(math.lcm, (a.denominator for a in self._entries), 1)
        integers = [int(a * lcm) for a in self._entries]
        gcd = reduce(math.gcd, (abs(i) for i in integers), 0)
        return RatVec._wrap(Fraction(i, gcd) for i in integers)

    def canonical(self) -> tuple["RatVec", int]:
        """
        Split the vector into a direction (primitive, first nonzero entry positive) and a sign.

        :return: (direction, sign) with self a positive multiple of sign * direction
        """
        direction = self.primitive()
        first = next(a for a in direction if a != 0)
        if first < 0:
            return -direction, -1
        return direction, 1

    def positive_multiple_of(self, other: "RatVec") -> Optional[Fraction]:
        """
        :return: c > 0 with self == c * other, or None if there is no such c
        """
        self._check_dim(other)
        if other.is_zero() or self.is_zero():
            return None
        index = next(i for i, a in enumerate(other) if a != 0)
        scalar = self[index] / other[index]
        if scalar <= 0 or other * scalar != self:
            return None
        return scalar

    def is_parallel(self, other: "RatVec") -> bool:
        self._check_dim(other)
        return rank(RatMat.from_rows([self, other])) <= 1

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix([rat_to_sympy(a) for a in self._entries])

    def to_strings(self) -> list[str]:
        return [rat2str(a) for a in self._entries]


class RatMat:
    """
    Immutable rectangular matrix of Fractions stored as a read-only numpy object array.
    """

    __slots__ = ("_data",)

    def __init__(self, rows: Iterable[Iterable[RationalLike]]):
        grid = [[to_rat(e) for e in row] for row in rows]
        if not grid or not grid[0]:
            raise DimensionMismatchError("Invalid matrix. Rows and columns must be positive")
        if any(len(row) != len(grid[0]) for row in grid):
            raise DimensionMismatchError("Invalid matrix. Rows have different lengths")
        data = np.empty((len(grid), len(grid[0])), dtype=object)
        for i, row in enumerate(grid):
            for j, value in enumerate(row):
                data[i, j] = value
        data.flags.writeable = False
        self._data = data

    @classmethod
    def _wrap(cls, data: np.ndarray) -> "RatMat":
        mat = cls.__new__(cls)
        data = np.array(data, dtype=object)
        data.flags.writeable = False
        mat._data = data
        return mat

    @classmethod
    def identity(cls, n: int) -> "RatMat":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMat":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def from_rows(cls, rows: Sequence[RatVec]) -> "RatMat":
        return cls([list(r) for r in rows])

    @classmethod
    def from_columns(cls, columns: Sequence[RatVec]) -> "RatMat":
        return cls.from_rows(columns).transpose()

    @classmethod
    def hstack(cls, *blocks: "RatMat") -> "RatMat":
        if len({b.rows for b in blocks}) != 1:
            raise DimensionMismatchError("Invalid hstack. Row counts differ")
        return cls._wrap(np.hstack([b._data for b in blocks]))

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    def is_square(self) -> bool:
        return self.rows == self.cols

    def entry(self, i: int, j: int) -> Fraction:
        return self._data[i, j]

    def row(self, i: int) -> RatVec:
        return RatVec._wrap(self._data[i, :])

    def column(self, j: int) -> RatVec:
        return RatVec._wrap(self._data[:, j])

    def columns(self) -> list[RatVec]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "RatMat":
        return RatMat._wrap(self._data.T)

    def key(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(row) for row in self._data)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(row) for row in self._data]

    def to_strings(self) -> list[list[str]]:
        return [[rat2str(e) for e in row] for row in self._data]

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix([[rat_to_sympy(e) for e in row] for row in self._data])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMat):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self._data == other._data))

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"RatMat({self.to_strings()})"

    def _check_same_shape(self, other: "RatMat") -> None:
        if self.shape != other.shape:
            raise DimensionMismatchError(f"Matrix shapes differ: {self.shape} != {other.shape}")

    def __add__(self, other: "RatMat") -> "RatMat":
        self._check_same_shape(other)
        return RatMat._wrap(self._data + other._data)

    def __sub__(self, other: "RatMat") -> "RatMat":
        self._check_same_shape(other)
        return RatMat._wrap(self._data - other._data)

    def __neg__(self) -> "RatMat":
        return RatMat._wrap(-self._data)

    def __mul__(self, scalar: RationalLike) -> "RatMat":
        return RatMat._wrap(self._data * to_rat(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: RationalLike) -> "RatMat":
        scalar = to_rat(scalar)
        if scalar == 0:
            raise ZeroDivisionError("Division of a matrix by zero")
        return RatMat._wrap(self._data / scalar)

    def __matmul__(self, other: Union["RatMat", RatVec]):
        if isinstance(other, RatVec):
            if self.cols != other.dim:
                raise DimensionMismatchError(f"Cannot apply a {self.shape} matrix to a vector of dim {other.dim}")
            return RatVec._wrap(self._data.dot(np.array(other.entries, dtype=object)))
        if isinstance(other, RatMat):
            if self.cols != other.rows:
                raise DimensionMismatchError(f"Cannot multiply {self.shape} by {other.shape}")
            return RatMat._wrap(self._data.dot(other._data))
        return NotImplemented

    def __pow__(self, exponent: int) -> "RatMat":
        if not self.is_square():
            raise DimensionMismatchError(f"Only square matrices have powers, got {self.shape}")
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = RatMat.identity(self.rows)
        base = self
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    def is_zero(self) -> bool:
        return all(e == 0 for e in self._data.flat)

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in self._data.flat)

    def is_entrywise_nonnegative(self) -> bool:
        return all(e >= 0 for e in self._data.flat)

    def is_entrywise_nonpositive(self) -> bool:
        return all(e <= 0 for e in self._data.flat)

    def det(self) -> Fraction:
        if not self.is_square():
            raise DimensionMismatchError(f"Only square matrices have determinants, got {self.shape}")
        m = self._data.copy()
        n = self.rows
        result = Fraction(1)
        for c in range(n):
            pivot = next((i for i in range(c, n) if m[i, c] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != c:
                m[[c, pivot], :] = m[[pivot, c], :]
                result = -result
            result *= m[c, c]
            for i in range(c + 1, n):
                if m[i, c] != 0:
                    m[i, :] = m[i, :] - (m[i, c] / m[c, c]) * m[c, :]
        return result

    def inverse(self) -> "RatMat":
        if not self.is_square():
            raise DimensionMismatchError(f"Only square matrices are invertible, got {self.shape}")
        n = self.rows
        reduced, pivots = _rref(np.hstack([self._data, RatMat.identity(n)._data]))
        if pivots[:n] != list(range(n)):
            raise SingularMatrixError("Matrix is not invertible")
        return RatMat._wrap(reduced[:, n:])


def _rref(data: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """
    Reduced row echelon form by exact Gauss-Jordan elimination.

    :return: (reduced copy of data, pivot column indices)
    """
    m = np.array(data, dtype=object)
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if m[i, c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            m[[r, pivot], :] = m[[pivot, r], :]
        m[r, :] = m[r, :] / m[r, c]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i, :] = m[i, :] - m[i, c] * m[r, :]
        pivots.append(c)
        r += 1
    return m, pivots


def solve(A: RatMat, b: RatVec) -> RatVec:
    """
    Solve A x = b exactly for square nonsingular A.
    """
    if not A.is_square():
        raise DimensionMismatchError(f"solve needs a square matrix, got {A.shape}")
    if A.rows != b.dim:
        raise DimensionMismatchError(f"Right hand side has dim {b.dim}, matrix has {A.rows} rows")
    n = A.rows
    augmented = np.hstack([A._data, np.array(b.entries, dtype=object).reshape(n, 1)])
    reduced, pivots = _rref(augmented)
    if pivots[:n] != list(range(n)) or len(pivots) > n:
        raise SingularMatrixError("Matrix is singular")
    return RatVec._wrap(reduced[:, n])


def rank(A: RatMat) -> int:
    return len(_rref(A._data)[1])


def nullspace(A: RatMat) -> list[RatVec]:
    """
    Basis of {x : A x = 0}, one vector per free column of the echelon form.
    """
    reduced, pivots = _rref(A._data)
    free = [c for c in range(A.cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * A.cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r, f]
        basis.append(RatVec._wrap(vec))
    return basis


def span_basis(vectors: Sequence[RatVec]) -> list[RatVec]:
    """
    Echelon basis (primitive integer vectors) of the span of the given vectors.
    """
    if not vectors:
        return []
    reduced, pivots = _rref(RatMat.from_rows(vectors)._data)
    return [RatVec._wrap(reduced[r, :]).primitive() for r in range(len(pivots))]


def charpoly(A: RatMat) -> MultiPoly:
    """
    Monic characteristic polynomial det(xI - A) in the variable ``x`` over QQ.
    """
    if not A.is_square():
        raise DimensionMismatchError(f"charpoly needs a square matrix, got {A.shape}")
    poly = A.to_sympy().charpoly(CHARPOLY_VARIABLE)
    return sympy.Poly(poly.as_expr(), CHARPOLY_VARIABLE, domain=QQ)


def nilpotency_index(N: RatMat) -> Optional[int]:
    """
    Smallest k >= 1 with N^k = 0, found by explicit powering up to the dimension, or None if N is not nilpotent.
    """
    power = N
    for k in range(1, N.rows + 1):
        if power.is_zero():
            return k
        power = power @ N
    return None


def _unipotent_part(M: RatMat) -> tuple[RatMat, int]:
    if not M.is_square():
        raise DimensionMismatchError(f"Unipotent matrices are square, got {M.shape}")
    N = M - RatMat.identity(M.rows)
    index = nilpotency_index(N)
    if index is None:
        raise NotUnipotentError(f"(M - I)^{M.rows} != 0, so M is not unipotent")
    return N, index


def unipotent_log(M: RatMat) -> RatMat:
    """
    log(M) = (M-I) - (M-I)^2/2 + (M-I)^3/3 - ..., a finite sum because M - I is nilpotent.
    """
    N, index = _unipotent_part(M)
    result = RatMat.zeros(M.rows, M.cols)
    power = RatMat.identity(M.rows)
    for k in range(1, index):
        power = power @ N
        term = power / k
        result = result + term if k % 2 else result - term
    return result


def nilpotent_exp(L: RatMat) -> RatMat:
    """
    exp(L) = I + L + L^2/2! + ..., truncated at the nilpotency index of L.
    """
    index = nilpotency_index(L)
    if index is None:
        raise NotUnipotentError("exp is only computed exactly for nilpotent matrices")
    result = RatMat.identity(L.rows)
    power = RatMat.identity(L.rows)
    for k in range(1, index):
        power = power @ L
        result = result + power / math.factorial(k)
    return result


@dataclass(frozen=True)
class UniPolyMat:
    """
    Square matrix whose entries are polynomials in t, stored densely by degree: sum_k t^k coefficients[k].
    """

    coefficients: tuple[RatMat, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise DimensionMismatchError("A polynomial matrix needs at least one coefficient")
        shape = self.coefficients[0].shape
        if shape[0] != shape[1] or any(c.shape != shape for c in self.coefficients):
            raise DimensionMismatchError("Polynomial matrix coefficients must be square and share a shape")
        trimmed = list(self.coefficients)
        while len(trimmed) > 1 and trimmed[-1].is_zero():
            trimmed.pop()
        object.__setattr__(self, "coefficients", tuple(trimmed))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def size(self) -> int:
        return self.coefficients[0].rows

    def coefficient(self, k: int) -> RatMat:
        if k < len(self.coefficients):
            return self.coefficients[k]
        return RatMat.zeros(self.size, self.size)

    def evaluate(self, t: RationalLike) -> RatMat:
        t = to_rat(t)
        result = self.coefficients[-1]
        for coefficient in reversed(self.coefficients[:-1]):
            result = result * t + coefficient
        return result

    def apply(self, q: RatVec) -> tuple[RatVec, ...]:
        """
        Coefficient vectors (by degree in t) of the polynomial vector M(t) q.
        """
        return tuple(c @ q for c in self.coefficients)

    def to_sympy(self, t: sympy.Symbol) -> sympy.Matrix:
        return sum((c.to_sympy() * t**k for k, c in enumerate(self.coefficients)), sympy.zeros(self.size, self.size))


def matrix_power_poly(M: RatMat) -> UniPolyMat:
    """
    M^t = exp(t log M) = I + t L + t^2/2! L^2 + ... for unipotent M, as an exact polynomial matrix in t.
    """
    L = unipotent_log(M)
    index = nilpotency_index(L)
    coefficients = [RatMat.identity(M.rows)]
    power = RatMat.identity(M.rows)
    for k in range(1, index):
        power = power @ L
        coefficients.append(power / math.factorial(k))
    return UniPolyMat(tuple(coefficients))


@dataclass(frozen=True)
class Ray:
    """
    An open ray: ``direction`` is primitive with its first nonzero entry positive, ``sign`` is +1 or -1.
    """

    direction: RatVec
    sign: int

    @classmethod
    def of(cls, vector: RatVec) -> "Ray":
        direction, sign = vector.canonical()
        return cls(direction, sign)

    @property
    def vector(self) -> RatVec:
        return self.direction * self.sign

    def __neg__(self) -> "Ray":
        return Ray(self.direction, -self.sign)

    def to_dict(self) -> dict:
        return {"direction": self.direction.to_strings(), "sign": self.sign}


def leading_direction(Mt: UniPolyMat, q: RatVec) -> Ray:
    """
    The ray that the normalization of M^t q approaches as t grows: the highest nonzero coefficient of M^t q.
    """
    for coefficient in reversed(Mt.apply(q)):
        if not coefficient.is_zero():
            return Ray.of(coefficient)
    raise ZeroVectorError("M^t q is identically zero")


def column_space_intersection(A: RatMat, B: RatMat) -> list[RatVec]:
    """
    Basis of col(A) ∩ col(B): solve A a = B b through the kernel of [A | -B].
    """
    if A.rows != B.rows:
        raise DimensionMismatchError(f"Row counts differ: {A.rows} != {B.rows}")
    kernel = nullspace(RatMat.hstack(A, -B))
    vectors = [A @ RatVec._wrap(k.entries[: A.cols]) for k in kernel]
    return span_basis([v for v in vectors if not v.is_zero()])
