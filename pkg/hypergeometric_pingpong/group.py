import logging
from functools import cached_property
from typing import Optional, Sequence

from .base import DegenerateConeError, DimensionMismatchError, RationalLike
from .cones import SimplicialCone
from .exact import RatMat, RatVec, UniPolyMat, matrix_power_poly, nullspace, unipotent_log
from .generators import HGTriple, ValidationReport, build, involution_order, rotation_order, validate
from .pingpong import PingPongTable

logger = logging.getLogger(__name__)

# Cones known to give ping-pong tables: n=3 cone(u, v, w) and n=2 cone(u, v)
DEFAULT_CONES = {
    2: ((-1, 1), (1, 2)),
    3: ((1, -2, 1), (1, 0, 3), (0, -1, 1)),
}


class HypergeometricGroup:
    """
    The hypergeometric group H_n = <R, T> with the unipotents U = TR and V = T^-1 R^-1 and their logarithms P, Q.

    :param n: dimension, at least 2
    """

    def __init__(self, n: int):
        self.n = n
        self.triple: HGTriple = build(n)
        self.R = self.triple.R
        self.U = self.triple.U
        self.T = self.triple.T
        self.R_inv = self.R.inverse()
        self.T_inv = self.T.inverse()
        self.V = self.T_inv @ self.R_inv
        self.rotation_order = rotation_order(self.R)
        self.involution_order = involution_order(self.T)

    def __repr__(self) -> str:
        return f"HypergeometricGroup(n={self.n})"

    @cached_property
    def P(self) -> RatMat:
        return unipotent_log(self.U)

    @cached_property
    def Q(self) -> RatMat:
        return unipotent_log(self.V)

    @cached_property
    def U_power(self) -> UniPolyMat:
        return matrix_power_poly(self.U)

    @cached_property
    def V_power(self) -> UniPolyMat:
        return matrix_power_poly(self.V)

    @staticmethod
    def fixed_vector(M: RatMat) -> RatVec:
        """
        Primitive spanning vector of the fixed line of M; the line must be one-dimensional.
        """
        kernel = nullspace(M - RatMat.identity(M.rows))
        if len(kernel) != 1:
            raise DimensionMismatchError(f"Fixed space has dimension {len(kernel)}, expected 1")
        return kernel[0].primitive()

    @cached_property
    def u(self) -> RatVec:
        """Eigenvector of U = TR."""
        return self.fixed_vector(self.U)

    @cached_property
    def v(self) -> RatVec:
        """Eigenvector of V = T^-1 R^-1."""
        return self.fixed_vector(self.V)

    def validate(self) -> ValidationReport:
        return validate(self.triple)

    def default_cone(self) -> SimplicialCone:
        if self.n not in DEFAULT_CONES:
            raise DegenerateConeError(f"No default cone for n={self.n}. Pass the generators explicitly")
        return SimplicialCone(DEFAULT_CONES[self.n])

    def table(self, cone: Optional[SimplicialCone] = None) -> PingPongTable:
        cone = cone or self.default_cone()
        return PingPongTable(cone, self.R, self.rotation_order, self.T, self.involution_order)

    def cone(self, generators: Sequence[Sequence[RationalLike]]) -> SimplicialCone:
        return SimplicialCone(generators)
