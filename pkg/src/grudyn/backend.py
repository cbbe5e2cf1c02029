"""Kernel backend selection.

The compiled extension is preferred when importable; set GRUDYN_BACKEND to
"python" or "cython" to force one (forcing the extension raises if the build
is missing). Both backends expose the same functions and status codes.
"""

from __future__ import annotations

import os

from . import _pykernels


def _select():
    choice = os.environ.get("GRUDYN_BACKEND", "auto").lower()
    if choice == "python":
        return _pykernels
    try:
        from . import _fastkern
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "GRUDYN_BACKEND=cython but the compiled extension is not built"
            )
        return _pykernels
    return _fastkern


kernels = _select()

BACKEND_NAME = kernels.BACKEND_NAME

EULER = _pykernels.EULER
RK4 = _pykernels.RK4
ST_MAXED = _pykernels.ST_MAXED
ST_CONVERGED = _pykernels.ST_CONVERGED
ST_ESCAPED = _pykernels.ST_ESCAPED
ST_BLOWUP = _pykernels.ST_BLOWUP
