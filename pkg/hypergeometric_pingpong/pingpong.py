import logging
import math
from dataclasses import dataclass
from typing import Optional

from .base import DEFAULT_EXPONENT_BOUND, DEFAULT_POWER_SEARCH_MARGIN, DimensionMismatchError, InvalidOrderError
from .cones import (
    Membership,
    OrthantMapClass,
    OrthantMapKind,
    SimplicialCone,
    classify_orthant_map,
    cone_matrix,
    escape_witness,
    maps_into_orthant,
    membership,
)
from .exact import RatMat, RatVec, nilpotency_index
from .words import Factor, InjectivityReport, Word, check_generators

logger = logging.getLogger(__name__)

CONTAINMENT = "contains"
DISJOINTNESS = "disjoint"
HALF_CONE = "half_cone"
POWER_FAMILY = "power_family"


@dataclass(frozen=True)
class PingPongTable:
    """
    :param cone: full-dimensional simplicial cone C, X = C ∪ -C
    :param rotation: R with R^rotation_order = I
    :param involution: T, of order 2 or of infinite order (``involution_order`` None)
    """

    cone: SimplicialCone
    rotation: RatMat
    rotation_order: int
    involution: RatMat
    involution_order: Optional[int] = 2

    def __post_init__(self):
        self.cone.require_full_dimensional()
        n = self.cone.dim
        if self.rotation.shape != (n, n) or self.involution.shape != (n, n):
            raise DimensionMismatchError(f"Generators must be {n}x{n} to act on the cone")
        identity = RatMat.identity(n)
        powers = [self.rotation**k for k in range(1, self.rotation_order + 1)]
        if self.rotation_order < 2 or powers[-1] != identity or identity in powers[:-1]:
            raise InvalidOrderError(f"R does not have order {self.rotation_order}")
        if self.involution == identity:
            raise InvalidOrderError("T is the identity")
        if self.involution_order == 2 and self.involution @ self.involution != identity:
            raise InvalidOrderError("T does not have order 2")
        if self.involution_order is None and nilpotency_index(self.involution - identity) is None:
            raise InvalidOrderError("T is not unipotent, so its infinite order is not established")
        if self.involution_order not in (2, None):
            raise InvalidOrderError(f"Invalid involution order {self.involution_order}. Must be 2 or None")

    @property
    def infinite(self) -> bool:
        return self.involution_order is None

    @property
    def steps(self) -> tuple[int, ...]:
        """Exponents of T whose one-step containment is checked."""
        return (1,) if self.involution_order == 2 else (1, -1)

    def rotations(self) -> list[tuple[int, RatMat]]:
        result, power = [], RatMat.identity(self.cone.dim)
        for i in range(1, self.rotation_order):
            power = power @ self.rotation
            result.append((i, power))
        return result

    def word(self, t_exponent: int, r_exponent: int) -> Word:
        return Word.reduce(
            [(Factor.INVOLUTION, t_exponent), (Factor.ROTATION, r_exponent)], self.rotation_order, self.involution_order
        )

    def negate(self) -> "PingPongTable":
        return PingPongTable(-self.cone, self.rotation, self.rotation_order, self.involution, self.involution_order)

    def to_dict(self) -> dict:
        return {
            "cone": self.cone.to_dict(),
            "rotation_order": self.rotation_order,
            "involution_order": self.involution_order if self.involution_order else "infinite",
        }


@dataclass(frozen=True)
class CheckResult:
    name: str
    word: str
    passed: bool
    cone_matrix: Optional[RatMat] = None
    classification: Optional[OrthantMapClass] = None
    detail: Optional[str] = None

    def to_dict(self) -> dict:
        data = {"name": self.name, "word": self.word, "passed": self.passed}
        if self.cone_matrix is not None:
            data["cone_matrix"] = self.cone_matrix.to_strings()
        if self.classification is not None:
            data["classification"] = self.classification.to_dict()
        if self.detail is not None:
            data["detail"] = self.detail
        return data


@dataclass(frozen=True)
class Witness:
    """
    A point q of the open cone C and the image of q under ``word`` that breaks the table:
    for containment the image misses X, for disjointness it lands in X.
    """

    kind: str
    word: Word
    point: RatVec
    image: RatVec
    point_membership: Membership
    image_membership: Membership

    @property
    def violates(self) -> bool:
        if self.point_membership is not Membership.INTERIOR_PLUS:
            return False
        if self.kind == CONTAINMENT:
            return not self.image_membership.in_open_union
        return self.image_membership.in_open_union

    def recheck(self, table: PingPongTable) -> bool:
        """
        Recompute the image and both memberships from scratch and confirm the violation.
        """
        image = self.word.matrix(table.rotation, table.involution) @ self.point
        fresh = Witness(
            self.kind, self.word, self.point, image, membership(table.cone, self.point), membership(table.cone, image)
        )
        return image == self.image and fresh.violates

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "word": str(self.word),
            "point": self.point.to_strings(),
            "image": self.image.to_strings(),
            "point_membership": self.point_membership.value,
            "image_membership": self.image_membership.value,
        }


@dataclass(frozen=True)
class Verdict:
    """
    ``power_path`` names what certified the powers of T: "order_two", "half_cone" or "power_family"
    (None when nothing did).
    """

    valid: bool
    checks: tuple[CheckResult, ...]
    witness: Optional[Witness] = None
    power_path: Optional[str] = None

    def failed_checks(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def cone_matrices(self, name: str = CONTAINMENT) -> dict[str, RatMat]:
        return {c.word: c.cone_matrix for c in self.checks if c.name == name}

    def to_dict(self) -> dict:
        data = {"valid": self.valid, "checks": [c.to_dict() for c in self.checks], "power_path": self.power_path}
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        return data


def _containment_check(table: PingPongTable, word: Word, M: RatMat) -> CheckResult:
    A = cone_matrix(table.cone, M)
    classification = classify_orthant_map(A)
    return CheckResult(CONTAINMENT, str(word), classification.maps_into, A, classification)


def _half_cone_checks(table: PingPongTable) -> list[CheckResult]:
    results = []
    for s in (1, -1):
        A = cone_matrix(table.cone, table.involution**s)
        classification = classify_orthant_map(A)
        word = Word.reduce([(Factor.INVOLUTION, s)], table.rotation_order, table.involution_order)
        results.append(CheckResult(HALF_CONE, str(word), classification.maps_into, A, classification))
    return results


def power_family_certificate(table: PingPongTable) -> list[CheckResult]:
    """
    Containment for all T^k R^i at once when (T - I)^2 = 0.

    Then T^k = I + kN, so the cone matrix of T^k R^i is A(k) = A0 + k A1. Along k = s, 2s, 3s, ... it equals
    F + (j - 1) S with F = A0 + s A1 and S = s A1; F entrywise >= 0 without zero rows and S >= 0 entrywise
    give T^k R^i C ⊆ C for every such k (symmetrically for -C).
    """
    if not table.infinite:
        return []
    N = table.involution - RatMat.identity(table.cone.dim)
    if not (N @ N).is_zero():
        return [CheckResult(POWER_FAMILY, "T^k R^i", False, detail="(T - I)^2 != 0, powers are not affine in k")]
    results = []
    for s in (1, -1):
        for i, Ri in table.rotations():
            A0, A1 = cone_matrix(table.cone, Ri), cone_matrix(table.cone, N @ Ri)
            start, slope = A0 + A1 * s, A1 * s
            if maps_into_orthant(start, 1) and slope.is_entrywise_nonnegative():
                passed, detail = True, "plus"
            elif maps_into_orthant(start, -1) and slope.is_entrywise_nonpositive():
                passed, detail = True, "minus"
            else:
                passed, detail = False, "not certified"
            label = f"T^k {table.word(0, i)}, k {'>= 1' if s > 0 else '<= -1'}"
            results.append(CheckResult(POWER_FAMILY, label, passed, detail=detail))
    return results


def verify(table: PingPongTable, fail_fast: bool = False) -> Verdict:
    """
    Exact ping-pong verdict. For infinite-order T the one-step checks use T and T^-1, and the remaining powers must
    be certified either by T^+-1 mapping C into +-C or by the power family certificate.

    :param fail_fast: stop at the first failed containment or disjointness check and skip the witness search
    """
    checks = []
    for s in table.steps:
        Ts = table.involution**s
        for i, Ri in table.rotations():
            word = table.word(s, i)
            if fail_fast:
                A = cone_matrix(table.cone, Ts @ Ri)
                if not (maps_into_orthant(A, 1) or maps_into_orthant(A, -1)):
                    return Verdict(valid=False, checks=tuple(checks) + (CheckResult(CONTAINMENT, str(word), False, A),))
            checks.append(_containment_check(table, word, Ts @ Ri))
    for i, Ri in table.rotations():
        A = cone_matrix(table.cone, Ri)
        classification = classify_orthant_map(A)
        word = table.word(0, i)
        checks.append(CheckResult(DISJOINTNESS, str(word), classification.disjoint, A, classification))
        if fail_fast and not classification.disjoint:
            return Verdict(valid=False, checks=tuple(checks))

    power_path = None if table.infinite else "order_two"
    if table.infinite:
        half = _half_cone_checks(table)
        checks.extend(half)
        if all(c.passed for c in half):
            power_path = HALF_CONE
        family = power_family_certificate(table)
        checks.extend(family)
        if power_path is None and family and all(c.passed for c in family):
            power_path = POWER_FAMILY

    valid = power_path is not None and all(c.passed for c in checks if c.name in (CONTAINMENT, DISJOINTNESS))
    witness = None if valid or fail_fast else falsify(table)
    logger.info("Verdict for %r: valid=%s, power path %s", table.cone, valid, power_path)
    return Verdict(valid=valid, checks=tuple(checks), witness=witness, power_path=power_path)


def _witness(table: PingPongTable, kind: str, word: Word, x: RatVec) -> Witness:
    point = table.cone.basis @ x
    image = word.matrix(table.rotation, table.involution) @ point
    return Witness(kind, word, point, image, membership(table.cone, point), membership(table.cone, image))


def _power_horizon(table: PingPongTable) -> int:
    """
    Largest |k| worth trying: past every sign change of the affine entries of A(k), plus a margin.
    """
    N = table.involution - RatMat.identity(table.cone.dim)
    if not (N @ N).is_zero():
        return DEFAULT_EXPONENT_BOUND
    horizon = 2
    for s in (1, -1):
        for _, Ri in table.rotations():
            A0, A1 = cone_matrix(table.cone, Ri), cone_matrix(table.cone, N @ Ri)
            for a0, a1 in zip(A0.key(), A1.key()):
                for b0, b1 in zip(a0, a1):
                    if b1 != 0:
                        horizon = max(horizon, math.ceil(abs(b0 / b1)) + 1)
    return horizon + DEFAULT_POWER_SEARCH_MARGIN


def falsify(table: PingPongTable) -> Optional[Witness]:
    """
    Search for a concrete counterexample: a containment failure of T^s R^i, an overlap X ∩ R^i X, and for
    infinite-order T a failing power T^k R^i with |k| up to the horizon. None means the table could not be falsified.
    """
    for s in table.steps:
        Ts = table.involution**s
        for i, Ri in table.rotations():
            x = escape_witness(cone_matrix(table.cone, Ts @ Ri))
            if x is not None:
                return _witness(table, CONTAINMENT, table.word(s, i), x)
    for i, Ri in table.rotations():
        classification = classify_orthant_map(cone_matrix(table.cone, Ri))
        if classification.kind is OrthantMapKind.OVERLAP:
            return _witness(table, DISJOINTNESS, table.word(0, i), classification.witness)
    if table.infinite:
        horizon = _power_horizon(table)
        for s in (1, -1):
            step = table.involution**s
            Tk = step
            for k in range(2, horizon + 1):
                Tk = Tk @ step
                for i, Ri in table.rotations():
                    x = escape_witness(cone_matrix(table.cone, Tk @ Ri))
                    if x is not None:
                        return _witness(table, CONTAINMENT, table.word(s * k, i), x)
    return None


def free_product_consequence_check(
    table: PingPongTable, max_len: int, exp_bound: int = DEFAULT_EXPONENT_BOUND
) -> InjectivityReport:
    """
    A valid table makes <R, T> a free product, so distinct reduced words of length <= max_len give distinct matrices.
    """
    return check_generators(
        table.rotation, table.involution, table.rotation_order, table.involution_order, max_len, exp_bound
    )
