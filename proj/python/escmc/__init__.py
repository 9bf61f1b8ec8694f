from ._escmc import *  # noqa: F401,F403
from ._escmc import __doc__  # noqa: F401
