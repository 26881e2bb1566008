"""Learning interaction kernels of agent systems on manifolds."""

from ._geokernel import *  # noqa: F401,F403
from ._geokernel import __doc__  # noqa: F401
