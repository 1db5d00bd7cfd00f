"""Maximum-weight basis selection with an incrementally built LU factorization."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

PIVOT_TOL = 1e-8


class RankError(ValueError):
    """Fewer than ``m`` numerically independent columns were found."""


@dataclass(frozen=True, eq=False)
class BasisFactorization:
    """LU factors of the basis matrix ``A_B``: ``A_B[perm, :] = L @ U``.

    ``basic[k]`` is the column of ``A`` that became the ``k``-th column of
    ``A_B``. Pivots are accepted only if ``|pivot| >= pivot_tol * ||a_j||_inf``.
    """

    basic: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    perm: np.ndarray
    pivot_tol: float

    @property
    def size(self):
        return self.basic.shape[0]

    @property
    def pivots(self):
        return np.diag(self.upper).copy()


def select_basis(A, d, pivot_tol=PIVOT_TOL):
    """Greedy maximum-weight basis of ``A``.

    Columns are visited in order of decreasing ``d`` (ties by column index)
    and accepted when they are numerically independent of the columns
    already accepted, until ``m`` columns are in. Independence is decided by
    the pivot of a left-looking LU step with partial pivoting.
    """
    m, n = A.shape
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (n,):
        raise ValueError(f"weights must have length {n}")
    if np.any(d <= 0):
        raise ValueError("basis weights must be strictly positive")

    lower = np.eye(m)
    upper = np.zeros((m, m))
    perm = np.arange(m)
    basic = []
    order = np.lexsort((np.arange(n), -d))
    for j in order:
        if len(basic) == m:
            break
        k = len(basic)
        col = A.column(j)
        scale = np.abs(col).max() if col.size else 0.0
        if scale == 0.0:
            continue
        a = col[perm]
        if k:
            u = solve_triangular(lower[:k, :k], a[:k], lower=True, unit_diagonal=True,
                                 check_finite=False)
            rest = a[k:] - lower[k:, :k] @ u
        else:
            u = np.zeros(0)
            rest = a
        piv = int(np.argmax(np.abs(rest)))
        if abs(rest[piv]) < pivot_tol * scale:
            continue
        if piv:
            i, i2 = k, k + piv
            perm[[i, i2]] = perm[[i2, i]]
            lower[[i, i2], :k] = lower[[i2, i], :k]
            rest[[0, piv]] = rest[[piv, 0]]
        upper[:k, k] = u
        upper[k, k] = rest[0]
        lower[k + 1:, k] = rest[1:] / rest[0]
        basic.append(int(j))
    if len(basic) < m:
        raise RankError(f"only {len(basic)} of {m} independent columns found")
    return BasisFactorization(np.array(basic, dtype=np.int64), lower, upper, perm, pivot_tol)


def basis_solve(fac, s):
    """Return ``t_B = A_B^{-1} s``."""
    s = np.asarray(s, dtype=np.float64)
    z = solve_triangular(fac.lower, s[fac.perm], lower=True, unit_diagonal=True,
                         check_finite=False)
    return solve_triangular(fac.upper, z, lower=False, check_finite=False)


def basis_solve_transpose(fac, s):
    """Return ``A_B^{-T} s``."""
    s = np.asarray(s, dtype=np.float64)
    z = solve_triangular(fac.upper, s, lower=False, trans="T", check_finite=False)
    z = solve_triangular(fac.lower, z, lower=True, unit_diagonal=True, trans="T",
                         check_finite=False)
    out = np.empty_like(z)
    out[fac.perm] = z
    return out


def lift(fac, s, n):
    """Full-length ``t`` with ``t[basic] = A_B^{-1} s`` and zeros elsewhere."""
    t = np.zeros(n)
    t[fac.basic] = basis_solve(fac, s)
    return t
