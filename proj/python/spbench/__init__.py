"""Stationary-point benchmark suite: model potentials, polynomial systems and solvers."""

from ._spbench import *  # noqa: F401,F403
from ._spbench import __version__  # noqa: F401
