"""Kernel selection: the compiled extension when importable, else numpy.

Set ``B1CLASSES_PURE_PYTHON=1`` to force the numpy implementation.
``BACKEND`` names the active implementation (``"cython"`` or ``"python"``).
"""
from __future__ import annotations

import os

from . import _kernels_py

_force_py = os.environ.get("B1CLASSES_PURE_PYTHON", "").strip().lower() not in ("", "0", "false", "no")

_impl = _kernels_py
BACKEND = "python"
if not _force_py:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

edge_grad_norms = _impl.edge_grad_norms
net_flux = _impl.net_flux

__all__ = ["BACKEND", "edge_grad_norms", "net_flux"]
