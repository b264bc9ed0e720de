"""Kernel backend selection.

The compiled extension is used when it has been built; otherwise the NumPy
versions are used. Setting ``CAVLAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

try:
    if os.environ.get("CAVLAB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

mode_table = _impl.mode_table
assemble_stiffness = _impl.assemble_stiffness

__all__ = ["BACKEND", "mode_table", "assemble_stiffness"]
