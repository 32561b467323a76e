"""Kernel backend selection.

The compiled extension is preferred when importable; set
``RSM_PURE_PYTHON=1`` to force the numpy fallback.  Both backends expose
``tv_prox`` and ``median_filter`` with identical semantics.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("RSM_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
tv_prox = _impl.tv_prox
median_filter = _impl.median_filter
