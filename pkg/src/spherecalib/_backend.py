"""Kernel backend selection.

The compiled extension is used when importable; set SPHERECALIB_PURE_PYTHON=1
to force the numpy fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SPHERECALIB_PURE_PYTHON", "0") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

KIND_PHI = _kernels_py.KIND_PHI
KIND_PSI = _kernels_py.KIND_PSI

accumulate = _impl.accumulate
profile_batch = _impl.profile_batch
