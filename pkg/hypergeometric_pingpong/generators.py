import logging
import math
from dataclasses import dataclass
from typing import Optional

import sympy

from .base import DEFAULT_MAX_ORDER, DimensionMismatchError, InvalidOrderError
from .exact import CHARPOLY_VARIABLE, QQ, RatMat, charpoly, nilpotency_index, rank

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HGTriple:
    """
    The generators of the hypergeometric group H_n: the rotation R, the unipotent U and the reflection-like T.

    Only the shapes are checked on construction; the structural relations are reported by ``validate``.
    """

    n: int
    R: RatMat
    U: RatMat
    T: RatMat

    def __post_init__(self):
        for name in ("R", "U", "T"):
            if getattr(self, name).shape != (self.n, self.n):
                raise DimensionMismatchError(f"{name} must be {self.n}x{self.n}, got {getattr(self, name).shape}")


@dataclass(frozen=True)
class ValidationReport:
    n: int
    checks: dict
    rank_t_minus_i: int

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"n": self.n, "passed": self.passed, "checks": dict(self.checks), "rank_t_minus_i": self.rank_t_minus_i}


def companion(coefficients: list[int]) -> RatMat:
    """
    Companion matrix of the monic polynomial x^n + c_{n-1} x^{n-1} + ... + c_0.

    :param coefficients: [c_0, ..., c_{n-1}]
    :return: matrix with ones on the subdiagonal and last column -c
    """
    n = len(coefficients)
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i, c in enumerate(coefficients):
        rows[i][n - 1] = -c
    return RatMat(rows)


def rotation_charpoly(n: int) -> sympy.Poly:
    return sympy.Poly(sum(CHARPOLY_VARIABLE**k for k in range(n + 1)), CHARPOLY_VARIABLE, domain=QQ)


def unipotent_charpoly(n: int) -> sympy.Poly:
    return sympy.Poly((CHARPOLY_VARIABLE - 1) ** n, CHARPOLY_VARIABLE, domain=QQ)


def build(n: int) -> HGTriple:
    """
    Build R_n (companion of 1 + x + ... + x^n), U_n (companion of (x - 1)^n) and T_n = U_n R_n^-1.

    Row i (1-based) of the last column of U_n is (-1)^(n-i) C(n, i-1), so the signs alternate and end positive.
    """
    if n < 2:
        raise InvalidOrderError(f"Invalid n {n}. Must be at least 2")
    R = companion([1] * n)
    U = companion([(-1) ** (n - k) * math.comb(n, k) for k in range(n)])
    T = U @ R.inverse()
    logger.debug("Built hypergeometric triple for n=%d", n)
    return HGTriple(n=n, R=R, U=U, T=T)


def validate(h: HGTriple) -> ValidationReport:
    identity = RatMat.identity(h.n)
    chi_r = charpoly(h.R)
    chi_u = charpoly(h.U)
    rank_t = rank(h.T - identity)
    checks = {
        "t_equals_u_r_inverse": h.T == h.U @ h.R.inverse(),
        "rank_t_minus_identity_is_one": rank_t == 1,
        "charpoly_r_is_cyclotomic_sum": chi_r == rotation_charpoly(h.n),
        "charpoly_u_is_unipotent": chi_u == unipotent_charpoly(h.n),
        "charpolys_coprime": sympy.gcd(chi_r, chi_u).degree() == 0,
    }
    report = ValidationReport(n=h.n, checks=checks, rank_t_minus_i=rank_t)
    if not report.passed:
        logger.warning("Triple for n=%d failed checks: %s", h.n, [k for k, v in checks.items() if not v])
    return report


def rotation_order(R: RatMat, max_order: Optional[int] = None) -> int:
    """
    Smallest m >= 1 with R^m = I.

    :param max_order: search bound, by default the larger of DEFAULT_MAX_ORDER and twice the squared dimension
    """
    if max_order is None:
        max_order = max(DEFAULT_MAX_ORDER, 2 * R.rows**2)
    identity = RatMat.identity(R.rows)
    power = R
    for m in range(1, max_order + 1):
        if power == identity:
            return m
        power = power @ R
    raise InvalidOrderError(f"R has no finite order up to {max_order}")


def involution_order(T: RatMat, max_order: Optional[int] = None) -> Optional[int]:
    """
    Order of T: an integer when T has finite order, None when T is unipotent and not the identity (infinite order).
    """
    identity = RatMat.identity(T.rows)
    if T != identity and nilpotency_index(T - identity) is not None:
        return None
    return rotation_order(T, max_order)
