"""Select the compiled kernel module, falling back to numpy.

Set ``F2SKETCH_PURE=1`` to force the fallback (used by the benchmark and by
the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _fallback

kernels = _fallback
BACKEND = "python"

if not os.environ.get("F2SKETCH_PURE"):
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        kernels = _kernels
        BACKEND = "cython"

__all__ = ["kernels", "BACKEND"]
