from ._prescurv import *  # noqa: F401,F403
