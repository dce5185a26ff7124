import itertools

import numpy as np
import pytest

from hypergeometric_pingpong.base import NonReducedWordError, OrderMismatchError
from hypergeometric_pingpong.exact import RatMat
from hypergeometric_pingpong.generators import build
from hypergeometric_pingpong.words import (
    Factor,
    Letter,
    Word,
    check_generators,
    count_reduced_words,
    enumerate_words,
    evaluate,
    injectivity_check,
    letter_choices,
)


@pytest.fixture
def h3():
    return build(3)


class TestWord:
    def test_parse_and_str(self):
        assert str(Word.parse('T R^2 T', 4)) == 'T R^2 T'
        assert str(Word.parse('R^4', 4)) == 'e'
        assert str(Word.parse('T T', 4)) == 'e'
        assert str(Word.parse('T^2 R T^-3', 3, None)) == 'T^2 R T^-3'
        assert len(Word.parse('e', 4)) == 0

    def test_reduce(self):
        w = Word.reduce([(Factor.ROTATION, 3), (Factor.ROTATION, 2), (Factor.INVOLUTION, 1)], 4)
        assert str(w) == 'R T'
        assert str(Word.parse('T^2 T^-2 R', 3, None)) == 'R'

    def test_not_reduced(self):
        with pytest.raises(NonReducedWordError):
            Word((Letter(Factor.ROTATION, 1), Letter(Factor.ROTATION, 1)), 4)
        with pytest.raises(NonReducedWordError):
            Word((Letter(Factor.ROTATION, 4),), 4)
        with pytest.raises(NonReducedWordError):
            Word((Letter(Factor.INVOLUTION, -1),), 4, 2)
        with pytest.raises(NonReducedWordError):
            Word.parse('S', 4)

    def test_product(self):
        assert str(Word.parse('T R', 4) * Word.parse('R^3 T', 4)) == 'e'
        assert str(Word.parse('R T', 4) * Word.parse('R', 4)) == 'R T R'
        with pytest.raises(OrderMismatchError):
            Word.parse('R', 4) * Word.parse('R', 3)

    def test_matrix(self, h3):
        assert Word.parse('T R', 4).matrix(h3.R, h3.T) == h3.T @ h3.R
        assert evaluate(Word.parse('R^2 T', 4), h3) == h3.R @ h3.R @ h3.T
        with pytest.raises(OrderMismatchError):
            evaluate(Word.parse('R', 5), h3)

    @pytest.mark.parametrize('n, inv', [(3, 2), (2, None)])
    def test_evaluate_is_multiplicative(self, n, inv):
        h = build(n)
        words = list(enumerate_words(n + 1, inv, 4, 2))
        rng = np.random.default_rng(20240603)
        for i, j in rng.integers(0, len(words), size=(100, 2)):
            w1, w2 = words[int(i)], words[int(j)]
            assert evaluate(w1 * w2, h) == evaluate(w1, h) @ evaluate(w2, h)


class TestEnumeration:
    def test_length_two(self):
        words = [str(w) for w in enumerate_words(4, 2, 2)]
        assert words[0] == 'e'
        assert words[1:5] == ['R', 'R^2', 'R^3', 'T']
        assert words[5:] == ['R T', 'R^2 T', 'R^3 T', 'T R', 'T R^2', 'T R^3']

    @pytest.mark.parametrize('m, inv, bound', [(4, 2, 3), (3, None, 2), (5, None, 1)])
    def test_counts(self, m, inv, bound):
        words = list(enumerate_words(m, inv, 5, bound))
        assert len(set(words)) == len(words)
        for length in range(6):
            assert sum(1 for w in words if len(w) == length) == count_reduced_words(m, inv, length, bound)

    @pytest.mark.parametrize('m, inv, bound', [(4, 2, 3), (3, None, 2)])
    def test_counts_by_brute_force(self, m, inv, bound):
        alphabet = [(f, letter) for f in Factor for letter in letter_choices(f, m, inv, bound)]
        for length in range(6):
            reduced = sum(
                1
                for letters in itertools.product(alphabet, repeat=length)
                if all(a[0] is not b[0] for a, b in zip(letters, letters[1:]))
            )
            assert reduced == count_reduced_words(m, inv, length, bound)

    def test_infinite_letters(self):
        letters = letter_choices(Factor.INVOLUTION, 3, None, 2)
        assert [str(letter) for letter in letters] == ['T', 'T^-1', 'T^2', 'T^-2']


class TestInjectivity:
    def test_n3(self, h3):
        report = injectivity_check(h3, 10)
        assert report.passed
        assert report.checked == sum(count_reduced_words(4, 2, k) for k in range(11))
        frame = report.to_frame()
        assert list(frame['words']) == [count_reduced_words(4, 2, k) for k in range(11)]

    def test_n2(self):
        report = injectivity_check(build(2), 8, exp_bound=3)
        assert report.passed
        assert report.checked == 60321
        assert report.to_dict()['collisions'] == []

    def test_relation_is_found(self):
        # R is a quarter turn and T = R^2, so T R^2 is trivial
        R = RatMat([[0, -1], [1, 0]])
        report = check_generators(R, R @ R, 4, 2, 2)
        assert not report.passed
        assert {'T R^2', 'R^2 T'} <= {str(w) for w in report.identity_words}
        assert report.collisions
