"""Pure numpy versions of the sparse kernels in ``_kernels.pyx``.

Signatures and results match the compiled module exactly; this module is
used when the extension is not built or when ``INEXACT_IPM_PURE=1``.
"""

import numpy as np


def _column_ids(indptr):
    return np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))


def csc_matvec(indptr, indices, data, v, m):
    cols = _column_ids(indptr)
    return np.bincount(indices, weights=data * v[cols], minlength=m).astype(np.float64)


def csc_rmatvec(indptr, indices, data, u):
    n = indptr.shape[0] - 1
    cols = _column_ids(indptr)
    return np.bincount(cols, weights=data * u[indices], minlength=n).astype(np.float64)


def csc_normal_apply(indptr, indices, data, d2, v):
    t = csc_rmatvec(indptr, indices, data, v) * d2
    return csc_matvec(indptr, indices, data, t, v.shape[0])


def csc_normal_diagonal(indptr, indices, data, d2, m):
    cols = _column_ids(indptr)
    return np.bincount(indices, weights=data * data * d2[cols], minlength=m).astype(np.float64)
