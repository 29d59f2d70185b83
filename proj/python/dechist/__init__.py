"""Decoherent-histories toolkit.

Dense operator algebra, class operators and decoherence functionals,
record projectors, a kicked two-level detector model, and the
oscillator-bath influence-functional machinery, all backed by the C++
core.
"""

from dechist._core import *  # noqa: F401,F403
from dechist._core import __version__, qbm, twostate  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
