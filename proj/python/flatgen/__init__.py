"""Aerobatic trajectory toolkit for a tailsitter flying wing.

Thin re-export of the compiled core. The world frame is north-east-down
(z positive downward); all quantities are SI.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
