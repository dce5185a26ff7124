import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import pandas as pd

from .base import (
    DEFAULT_CIRCLE_DIRECTIONS,
    DEFAULT_SEARCH_BOUND,
    DEFAULT_SEARCH_STEP,
    DEFAULT_WORKERS,
    DegenerateConeError,
    EmptyGridError,
    RationalLike,
    rat2str,
    rational_range,
    to_rat,
)
from .cones import (
    LinearInequality,
    Membership,
    SimplicialCone,
    classify_orthant_map,
    cone_matrix,
    membership,
    strict_feasible,
)
from .exact import RatMat, RatVec, nilpotency_index, rank
from .group import HypergeometricGroup
from .pingpong import Verdict, verify

logger = logging.getLogger(__name__)

BT_X = (0, 7, -2, 7)
BT_S = ((0, 0, 0, 1), (-5, 5, 1, -3), (5, -5, -2, 3), (0, 5, 1, -1))
BT_V0 = (0, 1, "-25/12", 0)

# Published spanning vectors of C+ and C-; the squared and cubed ones are scaled down by 12
BT_DISPLAYED = {
    "x": (0, 7, -2, 7),
    "Px": (-5, 9, -15, 11),
    "P2x": (0, 1, -2, 1),
    "P3x": (-1, 3, -3, 1),
    "Qx": (5, 16, -10, 14),
    "Q2x": (0, 1, -2, 1),
    "Q3x": (1, 2, -2, 4),
}


@dataclass(frozen=True)
class BravThomasData:
    group: HypergeometricGroup
    P: RatMat
    Q: RatMat
    x: RatVec
    Cplus: SimplicialCone
    Cminus: SimplicialCone
    S: RatMat

    def vectors(self) -> dict[str, RatVec]:
        result = {"x": self.x}
        for name, L in (("P", self.P), ("Q", self.Q)):
            power = self.x
            for k in range(1, 4):
                power = L @ power
                result[f"{name}x" if k == 1 else f"{name}{k}x"] = power
        return result

    def displayed_scalars(self) -> dict[str, Optional[Fraction]]:
        """
        c with computed = c * displayed for every displayed vector; None where the two are not positive multiples.
        The displayed P^2x, P^3x, Q^2x, Q^3x are the computed ones divided by 12.
        """
        vectors = self.vectors()
        return {name: vectors[name].positive_multiple_of(RatVec(shown)) for name, shown in BT_DISPLAYED.items()}

    def mismatches(self) -> list[str]:
        return [name for name, scalar in self.displayed_scalars().items() if scalar is None]

    def structure_checks(self) -> dict[str, bool]:
        vectors = self.vectors()
        return {
            "p_nilpotent_index_4": nilpotency_index(self.P) == 4,
            "q_nilpotent_index_4": nilpotency_index(self.Q) == 4,
            "rank_p_squared_is_2": rank(self.P @ self.P) == 2,
            "rank_q_squared_is_2": rank(self.Q @ self.Q) == 2,
            "p3x_fixed_by_u": self.group.U @ vectors["P3x"] == vectors["P3x"],
            "q3x_fixed_by_v": self.group.V @ vectors["Q3x"] == vectors["Q3x"],
        }


def build_bt() -> BravThomasData:
    """
    P = log(TR), Q = log(T^-1 R^-1) for n=4, and C+ = cone(x, Px, P^2x, P^3x), C- = cone(x, Qx, Q^2x, Q^3x).
    """
    group = HypergeometricGroup(4)
    x = RatVec(BT_X)
    P, Q = group.P, group.Q
    data = BravThomasData(
        group=group,
        P=P,
        Q=Q,
        x=x,
        Cplus=SimplicialCone([x, P @ x, P @ P @ x, P @ P @ P @ x]),
        Cminus=SimplicialCone([x, Q @ x, Q @ Q @ x, Q @ Q @ Q @ x]),
        S=RatMat(BT_S),
    )
    mismatches = data.mismatches()
    if mismatches:
        logger.warning("Four-dimensional data differs from the displayed vectors: %s", mismatches)
    return data


@lru_cache(maxsize=None)
def _bt() -> BravThomasData:
    return build_bt()


@dataclass(frozen=True)
class ClosedContainment:
    """
    Whether M maps the closed source cone into the closed target cone, and how that was decided.
    """

    label: str
    passed: bool
    path: str
    matrix: RatMat

    def to_dict(self) -> dict:
        return {"label": self.label, "passed": self.passed, "path": self.path, "cone_matrix": self.matrix.to_strings()}


def closed_containment(label: str, target: SimplicialCone, M: RatMat, source: SimplicialCone) -> ClosedContainment:
    """
    M C̄_source ⊆ C̄_target, read from the entrywise signs of the cone matrix; when some entry is negative, a point
    x >= 0 whose image has a negative coordinate is searched for by elimination.
    """
    A = cone_matrix(target, M, source)
    if A.is_entrywise_nonnegative():
        return ClosedContainment(label, True, "entrywise", A)
    dim = A.cols
    for i in range(A.rows):
        system = [LinearInequality.positive(dim, j) for j in range(dim)]
        system.append(LinearInequality.from_row(A.row(i), -1, strict=True))
        if strict_feasible(system) is not None:
            return ClosedContainment(label, False, "feasibility", A)
    return ClosedContainment(label, True, "feasibility", A)


@dataclass(frozen=True)
class SignedContainment:
    k: int
    rotation: int
    source: str
    target: str
    sign: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "rotation": self.rotation,
            "source": self.source,
            "target": self.target,
            "sign": self.sign,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class PairDisjointness:
    rotation: int
    target: str
    source: str
    kind: str
    passed: bool

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation,
            "target": self.target,
            "source": self.source,
            "kind": self.kind,
            "passed": self.passed,
        }


@dataclass
class BravThomasReport:
    half_cones: list = field(default_factory=list)
    containments: list = field(default_factory=list)
    disjointness: list = field(default_factory=list)
    rotation_order_five: bool = False

    @property
    def valid(self) -> bool:
        return (
            self.rotation_order_five
            and all(c.passed for c in self.half_cones)
            and all(c.passed for c in self.containments)
            and all(d.passed for d in self.disjointness)
        )

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "rotation_order_five": self.rotation_order_five,
            "half_cones": [c.to_dict() for c in self.half_cones],
            "containments": [c.to_dict() for c in self.containments],
            "disjointness": [d.to_dict() for d in self.disjointness],
        }


def _generator_sign(target: SimplicialCone, images: Sequence[RatVec]) -> int:
    """+1 if every image lies in the closed target, -1 if every image lies in its negative, 0 otherwise."""
    states = [membership(target, g) for g in images]
    if all(s in (Membership.INTERIOR_PLUS, Membership.BOUNDARY_PLUS) for s in states):
        return 1
    if all(s in (Membership.INTERIOR_MINUS, Membership.BOUNDARY_MINUS) for s in states):
        return -1
    return 0


def verify_bt_table(data: Optional[BravThomasData] = None, max_power: int = 3) -> BravThomasReport:
    """
    Check the four-dimensional table X = ±C+ ∪ ±C-, Y = R X ∪ ... ∪ R^4 X:
    T C̄+ ⊆ C̄+ and T^-1 C̄- ⊆ C̄-; T^k R^i maps both cones into ±C̄+ and T^-k R^i into ±C̄- for k = 1..max_power;
    C± ∩ R^i C± = ∅ for every pair of cones and every i.
    """
    data = data or _bt()
    group = data.group
    cones = {"C+": data.Cplus, "C-": data.Cminus}
    report = BravThomasReport(rotation_order_five=group.R**5 == RatMat.identity(4) and group.rotation_order == 5)
    report.half_cones = [
        closed_containment("T C+ in C+", data.Cplus, group.T, data.Cplus),
        closed_containment("T^-1 C- in C-", data.Cminus, group.T_inv, data.Cminus),
    ]
    rotations = [(i, group.R**i) for i in range(1, 5)]
    for sign_of_k, target_name in ((1, "C+"), (-1, "C-")):
        step = group.T if sign_of_k > 0 else group.T_inv
        power = RatMat.identity(4)
        for k in range(1, max_power + 1):
            power = power @ step
            for i, Ri in rotations:
                for source_name, source in cones.items():
                    images = [power @ Ri @ g for g in source.generators]
                    sign = _generator_sign(cones[target_name], images)
                    report.containments.append(
                        SignedContainment(sign_of_k * k, i, source_name, target_name, sign, sign != 0)
                    )
    for i, Ri in rotations:
        for target_name, target in cones.items():
            for source_name, source in cones.items():
                classification = classify_orthant_map(cone_matrix(target, Ri, source))
                report.disjointness.append(
                    PairDisjointness(i, target_name, source_name, classification.kind.value, classification.disjoint)
                )
    for check in report.half_cones:
        if not check.passed:
            logger.warning("Four-dimensional half-cone check failed: %s", check.label)
    logger.info("Four-dimensional table valid: %s", report.valid)
    return report


@dataclass(frozen=True)
class SConjugationReport:
    v0: RatVec
    image: RatVec
    scalar: Optional[Fraction]

    @property
    def positive_multiple(self) -> bool:
        return self.scalar is not None

    def to_dict(self) -> dict:
        return {
            "v0": self.v0.to_strings(),
            "image": self.image.to_strings(),
            "scalar": rat2str(self.scalar) if self.scalar is not None else None,
            "positive_multiple": self.positive_multiple,
        }


def verify_s_conjugation(
    v0: Sequence[RationalLike] = BT_V0, data: Optional[BravThomasData] = None
) -> SConjugationReport:
    """
    Whether x is a positive multiple of S v0; the scalar c has S v0 = c x.
    """
    data = data or _bt()
    v0 = RatVec(v0)
    image = data.S @ v0
    return SConjugationReport(v0, image, image.positive_multiple_of(data.x))


@dataclass
class SearchReport:
    bound: Fraction
    step: Fraction
    checked: int = 0
    skipped: int = 0
    survivors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bound": rat2str(self.bound),
            "step": rat2str(self.step),
            "checked": self.checked,
            "skipped": self.skipped,
            "survivors": [[rat2str(c) for c in y] for y in self.survivors],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[rat2str(c) for c in y] for y in self.survivors], columns=["y1", "y2", "y3", "y4"])


def fourth_generator_cone(y: Sequence[RationalLike], data: Optional[BravThomasData] = None) -> SimplicialCone:
    data = data or _bt()
    vectors = data.vectors()
    return SimplicialCone([vectors["P3x"], vectors["Q3x"], vectors["P2x"], RatVec(y)])


def check_candidate(y: tuple) -> Optional[bool]:
    """
    True if cone(P^3x, Q^3x, P^2x, y) gives a valid single-cone table, False if not, None if it is not simplicial.
    """
    data = _bt()
    try:
        cone = fourth_generator_cone(y, data)
    except DegenerateConeError:
        return None
    return verify(data.group.table(cone), fail_fast=True).valid


def search_fourth_generator(
    bound: RationalLike = DEFAULT_SEARCH_BOUND,
    step: RationalLike = DEFAULT_SEARCH_STEP,
    workers: int = DEFAULT_WORKERS,
) -> SearchReport:
    """
    Run the verifier on cone(P^3x, Q^3x, P^2x, y) for every y in the box [-bound, bound]^4.
    """
    bound, step = to_rat(bound), to_rat(step)
    values = rational_range(-bound, bound, step)
    candidates = list(itertools.product(values, repeat=4))
    if not candidates:
        raise EmptyGridError(f"No candidates in [-{rat2str(bound)}, {rat2str(bound)}]^4")
    logger.info("Searching %d fourth generators with %d worker(s)", len(candidates), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            chunksize = max(1, len(candidates) // (8 * workers))
            outcomes = list(executor.map(check_candidate, candidates, chunksize=chunksize))
    else:
        outcomes = [check_candidate(y) for y in candidates]
    report = SearchReport(bound=bound, step=step)
    for y, outcome in zip(candidates, outcomes):
        if outcome is None:
            report.skipped += 1
            continue
        report.checked += 1
        if outcome:
            report.survivors.append(y)
    report.survivors.sort()
    logger.info("Search finished: %d survivors, %d skipped", len(report.survivors), report.skipped)
    return report


def square_directions(count: int = DEFAULT_CIRCLE_DIRECTIONS) -> list[RatVec]:
    """
    Directions through ``count`` evenly spaced points on the boundary of the square [-1, 1]^2, starting at (1, 0)
    and running counterclockwise.
    """
    directions = []
    for k in range(count):
        s = Fraction(8 * k, count)
        if s <= 1:
            point = (1, s)
        elif s <= 3:
            point = (1 - (s - 1), 1)
        elif s <= 5:
            point = (-1, 1 - (s - 3))
        elif s <= 7:
            point = (-1 + (s - 5), -1)
        else:
            point = (1, -1 + (s - 7))
        directions.append(RatVec(point))
    return directions


@dataclass
class TwoDCaseReport:
    u: RatVec
    v: RatVec
    eigenvectors_fixed: bool
    verdict: Verdict
    directions: int
    uncovered: list = field(default_factory=list)

    @property
    def covered(self) -> bool:
        return not self.uncovered

    @property
    def valid(self) -> bool:
        return self.eigenvectors_fixed and self.verdict.valid and self.covered

    def to_dict(self) -> dict:
        return {
            "u": self.u.to_strings(),
            "v": self.v.to_strings(),
            "eigenvectors_fixed": self.eigenvectors_fixed,
            "verdict": self.verdict.to_dict(),
            "directions": self.directions,
            "uncovered": [d.to_strings() for d in self.uncovered],
            "valid": self.valid,
        }


def verify_2d_case(directions: int = DEFAULT_CIRCLE_DIRECTIONS) -> TwoDCaseReport:
    """
    The n=2 table X = C ∪ -C, Y = RX ∪ R^2X for C = cone(u, v), and the coverage of the plane by X̄ ∪ Ȳ.
    """
    group = HypergeometricGroup(2)
    u, v = group.u, group.v
    cone = SimplicialCone([u, v])
    verdict = verify(group.table(cone))
    inverse_rotations = [RatMat.identity(2), group.R_inv, group.R_inv @ group.R_inv]
    report = TwoDCaseReport(
        u=u,
        v=v,
        eigenvectors_fixed=group.U @ u == u and group.V @ v == v,
        verdict=verdict,
        directions=directions,
    )
    for d in square_directions(directions):
        if all(membership(cone, M @ d) is Membership.OUTSIDE for M in inverse_rotations):
            report.uncovered.append(d)
    return report
