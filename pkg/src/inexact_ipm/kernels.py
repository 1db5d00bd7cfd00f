"""Backend selection for the sparse kernels.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or when the environment variable ``INEXACT_IPM_PURE``
is set to a non-empty value other than ``0``.
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("INEXACT_IPM_PURE", "") not in ("", "0")

if _force_pure:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

csc_matvec = _impl.csc_matvec
csc_rmatvec = _impl.csc_rmatvec
csc_normal_apply = _impl.csc_normal_apply
csc_normal_diagonal = _impl.csc_normal_diagonal

__all__ = [
    "BACKEND",
    "csc_matvec",
    "csc_rmatvec",
    "csc_normal_apply",
    "csc_normal_diagonal",
]
