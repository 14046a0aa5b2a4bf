"""NB-IoT link-level simulator bindings."""

from ._nbiot import *  # noqa: F401,F403
from ._nbiot import __doc__  # noqa: F401
