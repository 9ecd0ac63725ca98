"""Hot inner-loop kernels with a compiled core and a pure-NumPy fallback.

The compiled extension (``physrec.kernels._native``, Cython) is preferred and
picked at import time; set ``PHYSREC_PURE_KERNELS=1`` to force the fallback.
Both backends implement the same arithmetic in the same operation order, so
rasterized frames and DTW tables are bitwise identical across backends.

Exported functions:
    fill_circle / fill_obb / fill_capsule -- in-place uint8 frame fills
    dtw_table                             -- accumulated-cost + step tables
    hs_iterate                            -- Jacobi relaxation for dense flow
"""

from __future__ import annotations

import os

from . import pure as _pure

if os.environ.get("PHYSREC_PURE_KERNELS"):
    _backend = _pure
    BACKEND = "pure"
else:
    try:
        from . import _native as _backend  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _backend = _pure
        BACKEND = "pure"

fill_circle = _backend.fill_circle
fill_obb = _backend.fill_obb
fill_capsule = _backend.fill_capsule
dtw_table = _backend.dtw_table
hs_iterate = _backend.hs_iterate

__all__ = [
    "BACKEND",
    "fill_circle",
    "fill_obb",
    "fill_capsule",
    "dtw_table",
    "hs_iterate",
]
