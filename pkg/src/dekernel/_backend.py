"""Selects the compiled fitting core, falling back to pure numpy.

Set ``DEKERNEL_PURE_PYTHON=1`` to force the fallback (used by the
backend benchmark and by debugging sessions).
"""

from __future__ import annotations

import os

from . import _corepy

if os.environ.get("DEKERNEL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _corepy
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _corepy
        BACKEND = "python"

de_fit_point = _impl.de_fit_point

STATUS_OK = _corepy.STATUS_OK
STATUS_MAX_ITER = _corepy.STATUS_MAX_ITER
STATUS_NO_DATA = _corepy.STATUS_NO_DATA
STATUS_LEFT_DOMAIN = _corepy.STATUS_LEFT_DOMAIN
