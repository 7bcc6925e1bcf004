from ._maxlab import *  # noqa: F401,F403
