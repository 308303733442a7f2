"""Select the Jacobi kernel backend at import time.

The compiled Cython core is preferred; the pure-Python kernel is the
fallback. Set OPINEQ_BACKEND=python (or =cython) to force a choice;
forcing cython raises if the extension is missing.
"""

from __future__ import annotations

import os

_requested = os.environ.get("OPINEQ_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _jacobi_py as _impl
elif _requested == "cython":
    from . import _jacobi_cy as _impl  # type: ignore[no-redef]
elif _requested == "":
    try:
        from . import _jacobi_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _jacobi_py as _impl
else:
    raise ImportError(f"unknown OPINEQ_BACKEND value: {_requested!r}")

BACKEND: str = _impl.BACKEND
jacobi_sweeps = _impl.jacobi_sweeps


def backend() -> str:
    """Name of the active kernel backend ("cython" or "python")."""
    return BACKEND
