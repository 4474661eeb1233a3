"""Select the compiled kernels when importable, else the pure-Python ones."""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("PERSMOD_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

rref = _impl.rref
first_solvable = _impl.first_solvable
