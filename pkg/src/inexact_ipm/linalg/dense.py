"""Dense symmetric positive definite solve used as the exact-direction oracle."""

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

DENSE_ORACLE_CAP = 500


class NotPositiveDefiniteError(LinAlgError):
    pass


def dense_spd_solve(M, rhs):
    """Solve ``M y = rhs`` by Cholesky factorization.

    Raises
    ------
    NotPositiveDefiniteError
        If ``M`` is not symmetric to 1e-12 (relative) or a nonpositive pivot
        appears during the factorization.
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    rhs = np.asarray(rhs, dtype=np.float64)
    scale = max(np.abs(M).max(), 1.0) if M.size else 1.0
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(M - M.T).max(initial=0.0) > 1e-12 * scale:
        raise NotPositiveDefiniteError("matrix is not symmetric")
    if M.shape[0] == 0:
        return np.zeros(0)
    try:
        factor = cho_factor(M, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None
    if np.any(np.diag(factor[0]) <= 0):
        raise NotPositiveDefiniteError("nonpositive pivot")
    return cho_solve(factor, rhs, check_finite=False)
