"""Kernel dispatch: compiled Cython core when available, pure Python otherwise.

Set INTERSEG_PURE_PYTHON=1 to force the fallback (used by the benchmark and
to debug kernel discrepancies).
"""

import os

from . import pure

if os.environ.get("INTERSEG_PURE_PYTHON") == "1":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

geodesic_distance = _impl.geodesic_distance
grid_maxflow = _impl.grid_maxflow


def backend_name() -> str:
    return BACKEND
