"""Sparse kernels, conjugate gradients, basis factorization and the dense oracle."""

from .basis import (
    PIVOT_TOL,
    BasisFactorization,
    RankError,
    basis_solve,
    basis_solve_transpose,
    lift,
    select_basis,
)
from .cg import ACCEPTED, BREAKDOWN, MAX_ITERATIONS, CgOutcome, conjugate_gradients
from .dense import DENSE_ORACLE_CAP, NotPositiveDefiniteError, dense_spd_solve
from .sparse import (
    DimensionError,
    SparseMatrix,
    matvec,
    matvec_transpose,
    normal_apply,
    normal_diagonal,
)

__all__ = [
    "ACCEPTED",
    "BREAKDOWN",
    "DENSE_ORACLE_CAP",
    "MAX_ITERATIONS",
    "PIVOT_TOL",
    "BasisFactorization",
    "CgOutcome",
    "DimensionError",
    "NotPositiveDefiniteError",
    "RankError",
    "SparseMatrix",
    "basis_solve",
    "basis_solve_transpose",
    "conjugate_gradients",
    "dense_spd_solve",
    "lift",
    "matvec",
    "matvec_transpose",
    "normal_apply",
    "normal_diagonal",
    "select_basis",
]
