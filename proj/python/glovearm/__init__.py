"""Glove-driven arm teleoperation core (C++ extension)."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
