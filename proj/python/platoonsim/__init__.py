"""Platoon-forming algorithms, speed profiles and polling-model delay analysis."""

from ._platoonsim import *  # noqa: F401,F403
from ._platoonsim import PlatoonError, __doc__  # noqa: F401
