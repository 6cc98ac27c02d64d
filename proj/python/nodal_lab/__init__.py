"""Python bindings for the nodal_lab C++ core."""

from ._nodal_lab import *  # noqa: F401,F403
from ._nodal_lab import __doc__  # noqa: F401

__version__ = "0.1.0"
