from .group import HypergeometricGroup  # noqa: F401
from .pingpong import PingPongTable, Verdict, falsify, verify  # noqa: F401
