from ._chernweil import *  # noqa: F401,F403
