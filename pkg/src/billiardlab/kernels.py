"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the numpy fallback
is used.  Setting ``BILLIARDLAB_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BILLIARDLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

trig_series = _impl.trig_series
support_gauge = _impl.support_gauge
polygon_gauge = _impl.polygon_gauge
lift_eval = _impl.lift_eval
lift_invert = _impl.lift_invert

__all__ = ["BACKEND", "trig_series", "support_gauge", "polygon_gauge",
           "lift_eval", "lift_invert"]
