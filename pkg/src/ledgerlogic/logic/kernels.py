"""Tree closure kernels, compiled when available.

Set ``LEDGERLOGIC_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("LEDGERLOGIC_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

diamond_up = _impl.diamond_up
box_down = _impl.box_down
diamond_down = _impl.diamond_down
box_up = _impl.box_up
next_exists = _impl.next_exists
next_all = _impl.next_all
prev_exists = _impl.prev_exists
prev_all = _impl.prev_all

__all__ = [
    "BACKEND", "diamond_up", "box_down", "diamond_down", "box_up",
    "next_exists", "next_all", "prev_exists", "prev_all",
]
