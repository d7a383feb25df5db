"""Backend selection for the hot grid sweeps.

The compiled extension is used when present; otherwise (or when the
environment variable BRANCHED_TRANSPORT_PURE is set to a non-empty value) the
NumPy implementations take over.  Both backends evaluate the same double
precision expressions, so results agree bit for bit.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BRANCHED_TRANSPORT_PURE"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

ratio_grid_min = _impl.ratio_grid_min
gap_grid_scan = _impl.gap_grid_scan
