from fractions import Fraction

import pytest
import sympy

from hypergeometric_pingpong.base import DimensionMismatchError, EmptyGridError
from hypergeometric_pingpong.cones import Membership, SimplicialCone
from hypergeometric_pingpong.exact import RatVec
from hypergeometric_pingpong.group import HypergeometricGroup
from hypergeometric_pingpong.uniqueness import (
    GridSpec,
    coefficient_of,
    eigen_generator_check,
    eta,
    eta_sign_forced,
    eta_sign_witness,
    lam,
    mu,
    eigen_basis,
    scan_point,
    symbolic_coords_TR,
    symbolic_coords_TRinv,
    symbolic_coords_TRt_v,
    t,
    uniqueness_scan,
    x,
    y,
    z,
)

SMALL_GRID = GridSpec((-1, 1, 1), (-1, 1, 1), (-1, 1, '1/2'))


def same(lhs, rhs) -> bool:
    return sympy.expand(sympy.sympify(lhs) - rhs) == 0


@pytest.fixture
def group():
    return HypergeometricGroup(3)


class TestSymbolic:
    def test_trt_v_at_known_cone(self):
        a, b, c = symbolic_coords_TRt_v().substitute({lam: 0, mu: 0, eta: 1})
        assert same(a, 2 * t**2)
        assert same(b, 1)
        assert same(c, 4 * t)

    def test_trt_v_general(self):
        a, b, c = symbolic_coords_TRt_v().expressions()
        assert sympy.simplify(a - (2 * t**2 - 4 * lam / eta * t)) == 0
        assert sympy.simplify(b - (1 - 4 * mu / eta * t)) == 0
        assert sympy.simplify(c - 4 * t / eta) == 0

    def test_trt_v_values(self):
        coordinates = symbolic_coords_TRt_v()
        assert coordinates.evaluate({t: 0, lam: 3, mu: -2, eta: 5}) == (0, 1, 0)
        assert coordinates.evaluate({t: 1, lam: 1, mu: 1, eta: 2}) == (0, -1, 2)

    def test_tr(self):
        a, b, c = symbolic_coords_TR().expressions()
        assert same(a, x + (2 - 4 * lam) * y + (1 + 2 * mu - 4 * lam * mu) * z)
        assert same(b, (1 - 4 * mu) * y - 4 * mu**2 * z)
        assert same(c, 4 * y + (1 + 4 * mu) * z)

    def test_tr_inverse(self):
        a, b, c = symbolic_coords_TRinv().expressions()
        assert same(a, (1 - 4 * lam) * x - 4 * lam**2 * z)
        assert same(b, y + (2 - 4 * mu) * x + (1 + 2 * lam - 4 * lam * mu) * z)
        assert same(c, 4 * x + (1 + 4 * lam) * z)

    def test_tr_at_known_cone(self):
        a, b, c = symbolic_coords_TR().substitute({lam: 0, mu: 0})
        assert same(a, x + 2 * y + z)
        assert same(b, y)
        assert same(c, 4 * y + z)

    def test_squared_coefficients(self):
        assert same(coefficient_of(symbolic_coords_TR().numerators[1], z), -4 * mu**2)
        assert same(coefficient_of(symbolic_coords_TRinv().numerators[0], z), -4 * lam**2)

    def test_eta_sign(self):
        assert eta_sign_forced()


class TestEtaWitness:
    @pytest.mark.parametrize('point', [(0, 0, -1), (1, 0, -1), (-2, 1, '-1/2'), (2, 2, -2)])
    def test_negative_eta(self, point):
        witness = eta_sign_witness(*point)
        assert witness is not None
        assert witness.image_membership is Membership.OUTSIDE
        assert witness.coordinates[0] > 0
        assert witness.coordinates[2] < 0
        assert len(witness.word) == 2 * witness.t

    def test_positive_eta(self):
        assert eta_sign_witness(0, 0, 1) is None


class TestScan:
    def test_known_cone_survives(self):
        entry = scan_point((Fraction(0), Fraction(0), Fraction(1)))
        assert entry.survived

    def test_mu_is_forced_to_zero(self, group):
        entry = scan_point((Fraction(0), Fraction(1), Fraction(1)))
        assert not entry.survived
        u, v, w = eigen_basis(group)
        table = group.table(SimplicialCone([u, v, u * 0 + v * 1 + w]))
        assert entry.witness.recheck(table)

    def test_small_grid(self, group):
        report = uniqueness_scan(SMALL_GRID)
        assert len(report.entries) == 3 * 3 * 4
        assert report.survivors == [(0, 0, Fraction(1, 2)), (0, 0, 1)]
        assert report.survivors_as_expected
        assert report.coefficients_match
        assert report.eta_sign_forced

        u, v, w = eigen_basis(group)
        for entry in report.entries:
            if entry.witness is not None:
                cone = SimplicialCone([u, v, u * entry.lam + v * entry.mu + w * entry.eta])
                assert entry.witness.recheck(group.table(cone))

        frame = report.to_frame()
        assert list(frame.columns) == ['lambda', 'mu', 'eta', 'survived', 'witness_word', 'eta_witness_t']
        assert frame['survived'].sum() == 2
        assert report.to_dict()['survivors'] == [['0', '0', '1/2'], ['0', '0', '1']]

    def test_default_grid(self):
        report = uniqueness_scan()
        assert len(report.entries) == 9 * 9 * 8
        halves = [Fraction(k, 2) for k in range(1, 5)]
        assert report.survivors == [(0, 0, eta) for eta in halves]
        assert report.survivors_as_expected
        assert report.coefficients_match

    def test_parallel_branch(self, mocker):
        executor = mocker.MagicMock()
        executor.map.side_effect = lambda fn, points, chunksize: map(fn, points)
        pool = mocker.patch('hypergeometric_pingpong.uniqueness.ProcessPoolExecutor')
        pool.return_value.__enter__.return_value = executor

        report = uniqueness_scan(GridSpec.single(0, 0, 1), workers=4)
        pool.assert_called_once_with(max_workers=4)
        assert report.survivors == [(0, 0, 1)]

    def test_empty_grid(self):
        with pytest.raises(EmptyGridError):
            uniqueness_scan(GridSpec.single(0, 0, 0))
        with pytest.raises(LookupError):
            uniqueness_scan(GridSpec((1, 0, 1), (0, 0, 1), (1, 1, 1)))


class TestEigenGenerators:
    def test_known_cone(self, group):
        report = eigen_generator_check(group.default_cone())
        assert report.passed
        assert (report.u_index, report.u_sign, report.v_index, report.v_sign) == (0, 1, 1, 1)

    def test_scaled_and_signed(self, group):
        u, v, w = eigen_basis(group)
        assert eigen_generator_check(SimplicialCone([u * 2, v * 3, w * 5])).passed
        report = eigen_generator_check(SimplicialCone([-u, v, w]))
        assert report.passed
        assert report.u_sign == -1

    def test_missing_u(self, group):
        u, v, w = eigen_basis(group)
        report = eigen_generator_check(SimplicialCone([u + v, v, w]))
        assert not report.passed
        assert report.u_index is None

    def test_dimension(self):
        with pytest.raises(DimensionMismatchError):
            eigen_generator_check(SimplicialCone([RatVec([1, 0]), RatVec([0, 1])]))
