"""Combined and separate-class false discovery rate analysis."""

from ._covfdr import *  # noqa: F401,F403
from ._covfdr import __version__  # noqa: F401
