"""Select the ADMM iteration kernel: compiled if available, numpy otherwise.

Set ``ANTIDEGRADE_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _admm_py

try:
    if os.environ.get("ANTIDEGRADE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernel requested")
    from . import _admm_core as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
KIND_PSD = _admm_py.KIND_PSD
KIND_FREE = _admm_py.KIND_FREE


def get(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None for the default)."""
    name = name or BACKEND
    if name == "python":
        return _admm_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
