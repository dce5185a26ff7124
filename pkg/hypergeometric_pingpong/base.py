import logging
import re
from fractions import Fraction
from typing import Union

# Default grids and search bounds. Every one of these can be overridden per call and per CLI flag.
DEFAULT_SCAN_LOW = Fraction(-2)
DEFAULT_SCAN_HIGH = Fraction(2)
DEFAULT_SCAN_STEP = Fraction(1, 2)

DEFAULT_OBSTRUCTION_LOW = Fraction(0)
DEFAULT_OBSTRUCTION_HIGH = Fraction(3)
DEFAULT_OBSTRUCTION_STEP = Fraction(1, 4)

DEFAULT_SEARCH_BOUND = 5
DEFAULT_SEARCH_STEP = Fraction(1)
DEFAULT_SMOKE_SEARCH_BOUND = 2

DEFAULT_MAX_WORD_LENGTH = 10
DEFAULT_EXPONENT_BOUND = 3

DEFAULT_FIGURE_STEPS = 25
DEFAULT_SVG_DIGITS = 12
DEFAULT_CIRCLE_DIRECTIONS = 360

# Floor on the order searched for by repeated powering; the search also reaches twice the squared dimension.
DEFAULT_MAX_ORDER = 12

# Extra powers examined past the last sign change when hunting for a power-family counterexample.
DEFAULT_POWER_SEARCH_MARGIN = 2

DEFAULT_WORKERS = 1
DEFAULT_LOG_LEVEL = "WARNING"

# Environment variables read (optionally, through a .env file) by the CLI and the tests
ENV_LOG_LEVEL = "HGPP_LOG_LEVEL"
ENV_WORKERS = "HGPP_WORKERS"
ENV_FULL_SEARCH = "HGPP_FULL_SEARCH"

RationalLike = Union[int, str, Fraction]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

logger = logging.getLogger(__name__)


class PingPongError(Exception):
    pass


class RationalParseError(PingPongError, ValueError):
    pass


class DimensionMismatchError(PingPongError, ValueError):
    pass


class SingularMatrixError(PingPongError, ValueError):
    pass


class DegenerateConeError(SingularMatrixError):
    pass


class NotUnipotentError(PingPongError, ValueError):
    pass


class ZeroVectorError(PingPongError, ValueError):
    pass


class InvalidOrderError(PingPongError, ValueError):
    pass


class OrderMismatchError(PingPongError, ValueError):
    pass


class NonReducedWordError(PingPongError, ValueError):
    pass


class OnProjectionHorizonError(PingPongError, ValueError):
    pass


class TPoleHitError(PingPongError, ValueError):
    pass


class ThetaZeroError(PingPongError, ValueError):
    pass


class EmptyGridError(PingPongError, LookupError):
    pass


def to_rat(value: RationalLike) -> Fraction:
    """
    Convert an integer, a Fraction or a string of the form "p/q" (or "p") to an exact Fraction.

    Floats and decimal literals are rejected.

    :param value: int, Fraction or "p/q" string
    :return: Fraction in lowest terms
    """
    if isinstance(value, bool):
        raise RationalParseError(f"Invalid rational {value!r}. Booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL_RE.match(value)
        if not match:
            raise RationalParseError(f"Invalid rational {value!r}. Expected an integer or p/q")
        numerator, denominator = match.group(1), match.group(2)
        if denominator is not None and int(denominator) == 0:
            raise RationalParseError(f"Invalid rational {value!r}. Denominator is zero")
        return Fraction(int(numerator), int(denominator) if denominator else 1)
    raise RationalParseError(f"Invalid rational {value!r}. Floating point and {type(value).__name__} are rejected")


def rat2str(value: Fraction) -> str:
    """
    Canonical text form of a rational: "p" for integers and "p/q" otherwise.
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_vector(text: str) -> list[Fraction]:
    """
    Parse a comma separated list of rationals, e.g. "1,-2,1" or "0,1,-25/12,0".
    """
    parts = text.split(",")
    if not text.strip() or any(not p.strip() for p in parts):
        raise RationalParseError(f"Invalid vector {text!r}. Expected comma separated rationals")
    return [to_rat(p) for p in parts]


def parse_vectors(text: str) -> list[list[Fraction]]:
    """
    Parse semicolon separated vectors, e.g. "1,-2,1;1,0,3;0,-1,1". All vectors must share a length.
    """
    vectors = [parse_vector(chunk) for chunk in text.split(";")]
    if len({len(v) for v in vectors}) != 1:
        raise RationalParseError(f"Invalid vector list {text!r}. Vectors have different lengths")
    return vectors


def rational_range(low: RationalLike, high: RationalLike, step: RationalLike) -> list[Fraction]:
    """
    Exact inclusive range low, low + step, ..., up to high.
    """
    low, high, step = to_rat(low), to_rat(high), to_rat(step)
    if step <= 0:
        raise ValueError(f"Invalid step {rat2str(step)}. Must be positive")
    if high < low:
        logger.debug("Empty range: %s > %s", rat2str(low), rat2str(high))
        return []
    count = int((high - low) / step)
    return [low + k * step for k in range(count + 1)]
