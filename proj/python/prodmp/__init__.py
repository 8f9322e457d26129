from ._prodmp import *  # noqa: F401,F403
from ._prodmp import __doc__  # noqa: F401
