import itertools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

import pandas as pd

from .base import DEFAULT_EXPONENT_BOUND, InvalidOrderError, NonReducedWordError, OrderMismatchError
from .exact import RatMat
from .generators import HGTriple, involution_order, rotation_order

logger = logging.getLogger(__name__)

_LETTER_RE = re.compile(r"^([RT])(?:\^(-?\d+))?$")


class Factor(Enum):
    ROTATION = "R"
    INVOLUTION = "T"


@dataclass(frozen=True)
class Letter:
    factor: Factor
    exponent: int

    def __str__(self) -> str:
        if self.exponent == 1:
            return self.factor.value
        return f"{self.factor.value}^{self.exponent}"


def _check_orders(rotation_order: int, involution_order: Optional[int]) -> None:
    if rotation_order < 2:
        raise InvalidOrderError(f"Invalid rotation order {rotation_order}. Must be at least 2")
    if involution_order is not None and involution_order != 2:
        raise InvalidOrderError(f"Invalid involution order {involution_order}. Must be 2 or None (infinite)")


@dataclass(frozen=True)
class Word:
    """
    Reduced word x_1 ... x_k: letters alternate between the factors, rotation exponents lie in 1..m-1 and the
    second factor has exponent 1 (order 2) or any nonzero integer (infinite order, ``involution_order`` None).
    """

    letters: tuple[Letter, ...]
    rotation_order: int
    involution_order: Optional[int] = 2

    def __post_init__(self):
        _check_orders(self.rotation_order, self.involution_order)
        object.__setattr__(self, "letters", tuple(self.letters))
        for index, letter in enumerate(self.letters):
            if letter.factor is Factor.ROTATION and not 1 <= letter.exponent < self.rotation_order:
                raise NonReducedWordError(f"Rotation exponent {letter.exponent} outside 1..{self.rotation_order - 1}")
            if letter.factor is Factor.INVOLUTION:
                if letter.exponent == 0 or (self.involution_order == 2 and letter.exponent != 1):
                    raise NonReducedWordError(f"Invalid exponent {letter.exponent} for T")
            if index and self.letters[index - 1].factor is letter.factor:
                raise NonReducedWordError(f"Adjacent letters from the same factor at position {index}")

    @classmethod
    def reduce(
        cls, letters: Iterable[tuple[Factor, int]], rotation_order: int, involution_order: Optional[int] = 2
    ) -> "Word":
        """
        Multiply out adjacent letters of the same factor and drop identities.
        """
        _check_orders(rotation_order, involution_order)
        stack: list[list] = []
        for factor, exponent in letters:
            if stack and stack[-1][0] is factor:
                stack[-1][1] += exponent
            else:
                stack.append([factor, exponent])
            top = stack[-1]
            if top[0] is Factor.ROTATION:
                top[1] %= rotation_order
            elif involution_order == 2:
                top[1] %= 2
            if top[1] == 0:
                stack.pop()
        return cls(tuple(Letter(f, e) for f, e in stack), rotation_order, involution_order)

    @classmethod
    def parse(cls, text: str, rotation_order: int, involution_order: Optional[int] = 2) -> "Word":
        """
        Parse "T R^2 T^-1" style text; "e" or "" is the empty word. The result is reduced.
        """
        tokens = [t for t in text.replace("*", " ").split() if t != "e"]
        letters = []
        for token in tokens:
            match = _LETTER_RE.match(token)
            if not match:
                raise NonReducedWordError(f"Invalid letter {token!r}")
            letters.append((Factor(match.group(1)), int(match.group(2) or 1)))
        return cls.reduce(letters, rotation_order, involution_order)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(str(letter) for letter in self.letters) or "e"

    def __mul__(self, other: "Word") -> "Word":
        if (self.rotation_order, self.involution_order) != (other.rotation_order, other.involution_order):
            raise OrderMismatchError("Words live in different free products")
        pairs = [(letter.factor, letter.exponent) for letter in self.letters + other.letters]
        return Word.reduce(pairs, self.rotation_order, self.involution_order)

    def matrix(self, R: RatMat, T: RatMat) -> RatMat:
        """
        The product x_1 ... x_k with R and T substituted.
        """
        result = RatMat.identity(R.rows)
        for letter in self.letters:
            base = R if letter.factor is Factor.ROTATION else T
            result = result @ (base**letter.exponent)
        return result


def letter_choices(
    factor: Factor, rotation_order: int, involution_order: Optional[int], exp_bound: int
) -> list[Letter]:
    if factor is Factor.ROTATION:
        return [Letter(factor, e) for e in range(1, rotation_order)]
    if involution_order == 2:
        return [Letter(factor, 1)]
    return [Letter(factor, s * e) for e in range(1, exp_bound + 1) for s in (1, -1)]


def enumerate_words(
    rotation_order: int,
    involution_order: Optional[int] = 2,
    max_len: int = 0,
    exp_bound: int = DEFAULT_EXPONENT_BOUND,
) -> Iterator[Word]:
    """
    Every reduced word of length <= max_len exactly once, by length, rotation-first words before T-first words.
    The empty word comes first.
    """
    _check_orders(rotation_order, involution_order)
    if max_len < 0:
        raise ValueError(f"Invalid max_len {max_len}. Must be nonnegative")
    choices = {f: letter_choices(f, rotation_order, involution_order, exp_bound) for f in Factor}
    yield Word((), rotation_order, involution_order)
    for length in range(1, max_len + 1):
        for first in (Factor.ROTATION, Factor.INVOLUTION):
            other = Factor.INVOLUTION if first is Factor.ROTATION else Factor.ROTATION
            pattern = [choices[first] if i % 2 == 0 else choices[other] for i in range(length)]
            for letters in itertools.product(*pattern):
                yield Word(letters, rotation_order, involution_order)


def count_reduced_words(
    rotation_order: int, involution_order: Optional[int], length: int, exp_bound: int = DEFAULT_EXPONENT_BOUND
) -> int:
    """
    Closed form for the number of reduced words of the given length: alternating products of letter counts.
    """
    a = rotation_order - 1
    b = 1 if involution_order == 2 else 2 * exp_bound
    if length == 0:
        return 1
    long_half, short_half = (length + 1) // 2, length // 2
    return a**long_half * b**short_half + b**long_half * a**short_half


def evaluate(w: Word, h: HGTriple) -> RatMat:
    if w.rotation_order != rotation_order(h.R) or w.involution_order != involution_order(h.T):
        raise OrderMismatchError(
            f"Word in Z/{w.rotation_order} * {w.involution_order or 'Z'} does not match the generators for n={h.n}"
        )
    return w.matrix(h.R, h.T)


@dataclass
class InjectivityReport:
    max_len: int
    checked: int = 0
    collisions: list = field(default_factory=list)
    identity_words: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.collisions and not self.identity_words

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "collisions": [[str(a), str(b)] for a, b in self.collisions],
            "identity_words": [str(w) for w in self.identity_words],
            "passed": self.passed,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(sorted(self.counts.items()), columns=["length", "words"])


def check_generators(
    R: RatMat,
    T: RatMat,
    rotation_order: int,
    involution_order: Optional[int],
    max_len: int,
    exp_bound: int = DEFAULT_EXPONENT_BOUND,
) -> InjectivityReport:
    """
    Evaluate every reduced word of length <= max_len by extending prefix products depth first, and collect
    pairs of distinct words with the same matrix plus nontrivial words equal to the identity.
    """
    _check_orders(rotation_order, involution_order)
    choices = {f: letter_choices(f, rotation_order, involution_order, exp_bound) for f in Factor}
    letter_matrices = {
        letter: (R if f is Factor.ROTATION else T) ** letter.exponent for f in Factor for letter in choices[f]
    }
    identity = RatMat.identity(R.rows)
    report = InjectivityReport(max_len=max_len)
    seen: dict = {}
    stack = [((), identity)]
    while stack:
        letters, matrix = stack.pop()
        word = Word(letters, rotation_order, involution_order)
        report.checked += 1
        report.counts[len(letters)] = report.counts.get(len(letters), 0) + 1
        key = matrix.key()
        if letters and matrix == identity:
            report.identity_words.append(word)
        if key in seen:
            report.collisions.append((seen[key], word))
        else:
            seen[key] = word
        if len(letters) == max_len:
            continue
        last = letters[-1].factor if letters else None
        for factor in Factor:
            if factor is last:
                continue
            for letter in reversed(choices[factor]):
                stack.append((letters + (letter,), matrix @ letter_matrices[letter]))
    logger.info("Checked %d words up to length %d: %d collisions", report.checked, max_len, len(report.collisions))
    return report


def injectivity_check(h: HGTriple, max_len: int, exp_bound: int = DEFAULT_EXPONENT_BOUND) -> InjectivityReport:
    return check_generators(h.R, h.T, rotation_order(h.R), involution_order(h.T), max_len, exp_bound)
