"""Preference-pair filtering, DPO/PRM losses, test-time selection, and a
fully synthetic iterative-DPO lab, backed by the C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
