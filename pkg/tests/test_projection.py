from fractions import Fraction

import numpy as np
import pytest
import sympy

from hypergeometric_pingpong.base import EmptyGridError, OnProjectionHorizonError, ThetaZeroError, TPoleHitError
from hypergeometric_pingpong.exact import RatVec
from hypergeometric_pingpong.group import HypergeometricGroup
from hypergeometric_pingpong.projection import (
    PlanePoint,
    act2d,
    act2d_word,
    build_figure,
    circle_invariance_identity,
    circle_table_check,
    emit_figures,
    lam1,
    lam2,
    limit_tangent,
    orbit_parametrization,
    phi,
    project,
    q1q2_obstruction,
    q1q2_scan,
    q1q2_symbolic,
    quadric_invariance,
    quadric_membership,
    reflect,
    reflection_identities,
    semiconjugacy_holds,
    t_sym,
    unproject,
)
from hypergeometric_pingpong.words import Word


@pytest.fixture
def group():
    return HypergeometricGroup(3)


@pytest.fixture
def random_points():
    rng = np.random.default_rng(20240602)
    points = []
    while len(points) < 500:
        s = RatVec(int(v) for v in rng.integers(-20, 21, size=3))
        if phi(s) != 0:
            points.append(s)
    return points


class TestProject:
    def test_eigenvectors(self, group):
        assert project(group.u) == PlanePoint(0, 1)
        assert project(group.v) == PlanePoint(1, 0)
        assert str(project(RatVec([1, -2, 1]))) == '(0, 1)'

    def test_scaling(self):
        s = RatVec([3, 1, '1/2'])
        assert project(s * -7) == project(s)

    def test_unproject(self):
        for p in (PlanePoint(0, 1), PlanePoint('2/3', -5), PlanePoint(-1, '1/7')):
            assert phi(unproject(p)) == 1
            assert project(unproject(p)) == p

    def test_horizon(self):
        with pytest.raises(OnProjectionHorizonError):
            project(RatVec([1, 1, 0]))
        with pytest.raises(ValueError):
            project(RatVec([1, 2]))


class TestAct2d:
    def test_rotation(self):
        p = PlanePoint(2, '1/3')
        assert act2d('R', p) == PlanePoint('1/3', -2)
        assert act2d('R^-1', act2d('R', p)) == p
        image = p
        for _ in range(4):
            image = act2d('R', image)
        assert image == p

    def test_involution(self):
        assert act2d('T', PlanePoint(1, 0)) == PlanePoint(0, 1)
        assert act2d('T', PlanePoint(0, 1)) == PlanePoint(1, 0)
        assert act2d('T', PlanePoint(1, 1)) == PlanePoint(1, 1)
        assert act2d('T', PlanePoint(-2, 0)) == PlanePoint('6/7', '4/7')
        p = PlanePoint('1/5', -3)
        assert act2d('T', act2d('T', p)) == p

    def test_errors(self):
        with pytest.raises(TPoleHitError):
            act2d('T', PlanePoint('3/4', '3/4'))
        with pytest.raises(ValueError):
            act2d('S', PlanePoint(0, 0))

    def test_word(self):
        p = PlanePoint(1, 0)
        assert act2d_word(Word.parse('T R', 4), p) == act2d('T', act2d('R', p))
        assert act2d_word(Word.parse('R^2 T', 4), p) == PlanePoint(0, -1)
        assert act2d_word(Word.parse('e', 4), p) == p

    def test_reflect(self):
        assert reflect(PlanePoint(1, 2)) == PlanePoint(2, 1)


class TestSemiconjugacy:
    @pytest.mark.parametrize('g', ['R', 'R^-1', 'T'])
    def test_random_points(self, group, random_points, g):
        for s in random_points:
            if g == 'T' and phi(group.T @ s) == 0:
                continue
            assert semiconjugacy_holds(g, s, group)

    def test_worked_point(self, group):
        s = RatVec([1, 0, 0])
        assert project(group.R @ s) == PlanePoint(0, 2)
        assert project(group.T @ s) == PlanePoint('6/7', '4/7')


class TestIdentities:
    def test_circle(self):
        report = circle_invariance_identity()
        assert report.holds
        assert report['numerator_identity'].holds
        assert report.to_dict()['holds'] is True

    def test_quadric(self):
        assert quadric_invariance().holds

    def test_quadric_membership(self, group):
        assert quadric_membership(group.u)
        assert quadric_membership(group.v)
        assert not quadric_membership(RatVec([1, 0, 0]))

    def test_reflection(self):
        report = reflection_identities()
        assert report.holds
        assert {c.name for c in report.checks} == {'f_R_f_a', 'f_R_f_b', 'f_T_f_a', 'f_T_f_b'}


class TestObstruction:
    def test_first_point(self):
        report = q1q2_obstruction(0, 1)
        assert report.theta == -9
        assert (report.a, report.b, report.c, report.d) == (
            Fraction(1, 9),
            Fraction(-2, 9),
            Fraction(1, 9),
            Fraction(10, 9),
        )
        assert report.trs == PlanePoint(0, '4/3')
        assert report.matches_closed_forms
        assert report.opposite_signs
        assert report.reflection_consistent
        assert report.reflected_image == PlanePoint('4/3', 0)

    def test_second_point(self):
        report = q1q2_obstruction(1, 0)
        assert (report.a, report.b, report.c, report.d) == (0, -1, 0, 2)
        assert report.opposite_signs
        assert report.to_dict()['abcd'] == ['0', '-1', '0', '2']

    @pytest.mark.parametrize('point', [('1/2', '1/3'), (2, 0), (5, 7), (0, '1/4')])
    def test_closed_forms(self, point):
        report = q1q2_obstruction(*point)
        assert report.matches_closed_forms
        assert report.opposite_signs
        assert report.reflection_consistent

    def test_invalid(self):
        with pytest.raises(ThetaZeroError):
            q1q2_obstruction('3/2', 1)
        with pytest.raises(ValueError):
            q1q2_obstruction(0, 0)
        with pytest.raises(ValueError):
            q1q2_obstruction(-1, 1)

    def test_default_grid(self, mocker):
        warning = mocker.patch('hypergeometric_pingpong.projection.logger.warning')
        reports = q1q2_scan()
        assert len(reports) == 13 * 13 - 1 - 13
        assert all(r.matches_closed_forms for r in reports)
        assert all(r.opposite_signs for r in reports)
        assert all(r.reflection_consistent for r in reports)
        assert Fraction(3, 2) not in {r.lam1 for r in reports}
        warning.assert_not_called()

    def test_empty_grid(self):
        with pytest.raises(EmptyGridError):
            q1q2_scan(0, 0, 1)

    def test_symbolic(self):
        a, b, c, d = q1q2_symbolic()
        theta = (2 * lam1 - 3) * (lam1 + 2 * lam2 + 1)
        assert sympy.cancel(a - (lam1 - 1) / theta) == 0
        assert sympy.cancel(b - 2 * (lam1 + lam2) ** 2 / theta) == 0
        assert sympy.cancel(c - a) == 0
        assert sympy.cancel(d + 2 * (lam2**2 + lam1 + 3 * lam2 + 1) / theta) == 0


class TestOrbits:
    def test_parametrization(self):
        a, b = orbit_parametrization('TR')
        denominator = 2 * t_sym**2 + 2 * t_sym + 1
        assert sympy.cancel(a - (2 * t_sym + 1) / denominator) == 0
        assert sympy.cancel(b - (1 - 1 / denominator)) == 0
        assert sympy.cancel(a**2 + b**2 - 1) == 0

    def test_tangents(self):
        forward = limit_tangent('TR')
        assert forward.limit_point == (0, 1)
        assert forward.direction == 'horizontal'

        backward = limit_tangent('TR^-1')
        assert backward.limit_point == (1, 0)
        assert backward.direction == 'vertical'
        assert backward.to_dict()['direction'] == 'vertical'

    def test_invalid(self):
        with pytest.raises(ValueError):
            orbit_parametrization('R')


class TestCircleTable:
    def test_passes(self):
        report = circle_table_check(30)
        assert report.passed
        assert report.to_dict() == {'samples': 30, 'passed': True, 'failures': []}


class TestFigures:
    def test_fig1(self):
        figure = build_figure('fig1')
        assert [s.label for s in figure.shapes] == ['X', 'R1X', 'R2X', 'R3X', 'TR1X', 'TR2X', 'TR3X']
        assert figure.shape('R1X').points == (PlanePoint(1, 0), PlanePoint(0, -1), PlanePoint(1, -1))
        assert figure.shape('TR1X').points == (PlanePoint(0, 1), PlanePoint('3/5', '4/5'), PlanePoint('1/3', 1))

    def test_fig2(self):
        figure = build_figure('fig2', steps=6)
        forward = figure.shape('TR^t(1,0)').points
        assert len(forward) == 6
        assert forward[0] == PlanePoint('3/5', '4/5')
        assert all(p.on_unit_circle for p in forward)
        assert all(p.on_unit_circle for p in figure.shape('TR^-1^t(0,1)').points)
        assert len(figure.annotations['tangents']) == 2

    def test_fig34(self):
        figure = build_figure('fig34')
        assert figure.shape("X'").points == (PlanePoint(0, 1), PlanePoint(1, 0), PlanePoint(2, 3))
        assert figure.annotations == {'s': ['2', '3']}

    def test_invalid(self):
        with pytest.raises(ValueError):
            build_figure('fig9')
        with pytest.raises(ValueError):
            emit_figures('fig1', 'png', 'unused')

    def test_emit_svg(self, tmp_path):
        path = tmp_path / 'fig1.svg'
        emit_figures('fig1', 'svg', str(path))
        text = path.read_text()
        assert '<svg' in text
        assert text.count('<polygon') == 7
        assert '<title>TR1X</title>' in text

    def test_fig2_svg_shows_tangents(self, tmp_path):
        path = tmp_path / 'fig2.svg'
        figure = emit_figures('fig2', 'svg', str(path), steps=4)
        assert [text for _, text in figure.labels] == ['TR horizontal', 'TR^-1 vertical']
        assert figure.labels[0][0] == PlanePoint(0, 1)
        text = path.read_text()
        assert text.count('<text') == 2
        assert '>TR^-1 vertical</text>' in text

    def test_emit_csv(self, tmp_path):
        path = tmp_path / 'fig34.csv'
        figure = emit_figures('fig34', 'csv', str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == 'label,a_num,a_den,b_num,b_den'
        assert len(lines) == 1 + len(figure.to_frame())
        assert "X',2,1,3,1" in lines
