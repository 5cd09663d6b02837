"""Non-Markovian quantum dynamical maps.

Superoperators are (d*d, d*d) complex arrays acting on column-stacked
density matrices.
"""

from ._core import *  # noqa: F401,F403
from ._core import NumericalError

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
