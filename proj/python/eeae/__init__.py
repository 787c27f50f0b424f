"""Exclusivity-enhanced stacked autoencoders (C++ core)."""

from ._eeae import *  # noqa: F401,F403
from ._eeae import __doc__  # noqa: F401
