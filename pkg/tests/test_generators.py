import pytest

from hypergeometric_pingpong.base import DEFAULT_EXPONENT_BOUND, InvalidOrderError
from hypergeometric_pingpong.exact import RatMat
from hypergeometric_pingpong.generators import build, companion, involution_order, rotation_order, validate
from hypergeometric_pingpong.group import HypergeometricGroup
from hypergeometric_pingpong.words import injectivity_check


class TestBuild:
    def test_n2(self):
        h = build(2)
        assert h.R == RatMat([[0, -1], [1, -1]])
        assert h.U == RatMat([[0, -1], [1, 2]])
        assert h.T == RatMat([[1, 0], [-3, 1]])

    def test_n3(self):
        h = build(3)
        assert h.R == RatMat([[0, 0, -1], [1, 0, -1], [0, 1, -1]])
        assert h.U == RatMat([[0, 0, 1], [1, 0, -3], [0, 1, 3]])
        assert h.T == RatMat([[-1, 0, 0], [2, 1, 0], [-4, 0, 1]])

    def test_n4(self):
        h = build(4)
        assert h.R == RatMat([[0, 0, 0, -1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1]])
        assert h.U == RatMat([[0, 0, 0, -1], [1, 0, 0, 4], [0, 1, 0, -6], [0, 0, 1, 4]])
        assert h.T == RatMat([[1, 0, 0, 0], [-5, 1, 0, 0], [5, 0, 1, 0], [-5, 0, 0, 1]])

    def test_companion(self):
        assert companion([1, 1]) == RatMat([[0, -1], [1, -1]])

    def test_invalid_n(self):
        with pytest.raises(InvalidOrderError):
            build(1)


class TestValidate:
    @pytest.mark.parametrize('n', [2, 3, 4, 5])
    def test_relations(self, n):
        report = validate(build(n))
        assert report.passed, report.checks
        assert report.rank_t_minus_i == 1
        assert report.to_dict()['passed'] is True

    def test_broken_triple(self, mocker):
        h = build(3)
        warning = mocker.patch('hypergeometric_pingpong.generators.logger.warning')
        broken = type(h)(n=3, R=h.R, U=h.U, T=RatMat.identity(3))
        report = validate(broken)
        assert not report.passed
        assert not report.checks['t_equals_u_r_inverse']
        assert report.rank_t_minus_i == 0
        warning.assert_called_once()


class TestOrders:
    @pytest.mark.parametrize('n', [2, 3, 4])
    def test_rotation_order(self, n):
        assert rotation_order(build(n).R) == n + 1

    def test_involution_order(self):
        assert involution_order(build(3).T) == 2
        assert involution_order(build(2).T) is None
        assert involution_order(build(4).T) is None

    @pytest.mark.parametrize('n', [2, 4])
    def test_infinite_order_powers(self, n):
        T = build(n).T
        identity = RatMat.identity(n)
        assert all(T**k != identity for k in range(1, 11))

    def test_no_finite_order(self):
        with pytest.raises(InvalidOrderError):
            rotation_order(RatMat([[2, 0], [0, 1]]))
        with pytest.raises(InvalidOrderError, match='up to 3'):
            rotation_order(build(3).R, max_order=3)

    def test_order_above_twelve(self):
        h = build(12)
        assert rotation_order(h.R) == 13
        assert involution_order(h.T) is None
        report = injectivity_check(h, 1)
        assert report.passed
        assert report.checked == 1 + 12 + 2 * DEFAULT_EXPONENT_BOUND


class TestGroup:
    def test_unipotents_and_eigenvectors(self):
        g3 = HypergeometricGroup(3)
        assert g3.U == g3.T @ g3.R
        assert g3.V == g3.T @ g3.R_inv
        assert list(g3.u) == [1, -2, 1]
        assert list(g3.v) == [1, 0, 3]

        g2 = HypergeometricGroup(2)
        assert list(g2.u) == [-1, 1]
        assert list(g2.v) == [1, 2]

    def test_default_cone(self):
        assert HypergeometricGroup(3).default_cone().k == 3
        with pytest.raises(ValueError):
            HypergeometricGroup(4).default_cone()
