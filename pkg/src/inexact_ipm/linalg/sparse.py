"""Compressed-column sparse matrix with an on-demand row mirror."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .. import kernels


class DimensionError(ValueError):
    """Operand sizes do not match the matrix."""


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """An ``m x n`` matrix in compressed-column (CSC) layout.

    ``indptr[j]:indptr[j+1]`` delimits column ``j`` inside ``indices`` (row
    numbers, strictly increasing per column) and ``data`` (nonzero values).
    """

    num_rows: int
    num_cols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        for arr in (indptr, indices, data):
            arr.flags.writeable = False
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "data", data)
        self._check_structure()

    def _check_structure(self):
        m, n = self.num_rows, self.num_cols
        if m < 0 or n < 0:
            raise ValueError("negative matrix dimension")
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise ValueError("column offsets must have length n+1 and start at 0")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("column offsets must be nondecreasing")
        nnz = int(self.indptr[-1])
        if self.indices.shape != (nnz,) or self.data.shape != (nnz,):
            raise ValueError("row indices and values must have length nnz")
        if nnz:
            if self.indices.min() < 0 or self.indices.max() >= m:
                raise ValueError("row index out of range")
            # strictly increasing within a column: a non-increase may only
            # happen at a column boundary
            steps = np.diff(self.indices)
            starts = np.zeros(nnz, dtype=bool)
            starts[self.indptr[1:-1][self.indptr[1:-1] < nnz]] = True
            if np.any((steps <= 0) & ~starts[1:]):
                raise ValueError("row indices must be strictly increasing within each column")
            if np.any(self.data == 0.0):
                raise ValueError("explicitly stored zero value")
            if not np.all(np.isfinite(self.data)):
                raise ValueError("non-finite matrix value")

    @property
    def shape(self):
        return (self.num_rows, self.num_cols)

    @property
    def nnz(self):
        return int(self.indptr[-1])

    @classmethod
    def from_dense(cls, dense):
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        m, n = dense.shape
        indptr = [0]
        indices = []
        data = []
        for j in range(n):
            rows = np.flatnonzero(dense[:, j])
            indices.extend(rows.tolist())
            data.extend(dense[rows, j].tolist())
            indptr.append(len(indices))
        return cls(m, n, np.array(indptr), np.array(indices, dtype=np.int64), np.array(data))

    @classmethod
    def from_triplets(cls, m, n, rows, cols, vals):
        """Build from coordinate triplets; duplicates are summed, zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError("triplet index out of range")
        order = np.lexsort((rows, cols))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key = cols * max(m, 1) + rows
            uniq, first = np.unique(key, return_index=True)
            vals = np.add.reduceat(vals, first)
            rows, cols = rows[first], cols[first]
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, cols + 1, 1)
        return cls(m, n, np.cumsum(indptr), rows, vals)

    def to_dense(self):
        out = np.zeros((self.num_rows, self.num_cols))
        for j in range(self.num_cols):
            sl = slice(self.indptr[j], self.indptr[j + 1])
            out[self.indices[sl], j] = self.data[sl]
        return out

    def column(self, j):
        """Dense copy of column ``j``."""
        out = np.zeros(self.num_rows)
        sl = slice(self.indptr[j], self.indptr[j + 1])
        out[self.indices[sl]] = self.data[sl]
        return out

    def column_pattern(self, j):
        sl = slice(self.indptr[j], self.indptr[j + 1])
        return self.indices[sl], self.data[sl]

    @cached_property
    def row_mirror(self):
        """The same matrix in compressed-row layout: ``(indptr, indices, data)``.

        Stored as the CSC arrays of the transpose, so the column kernels apply.
        """
        nnz = self.nnz
        cols = np.repeat(np.arange(self.num_cols, dtype=np.int64), np.diff(self.indptr))
        order = np.lexsort((cols, self.indices)) if nnz else np.zeros(0, dtype=np.int64)
        counts = np.bincount(self.indices, minlength=self.num_rows) if nnz else np.zeros(self.num_rows, dtype=np.int64)
        rowptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        return rowptr, cols[order], self.data[order]

    def transpose(self):
        rowptr, colidx, vals = self.row_mirror
        return SparseMatrix(self.num_cols, self.num_rows, rowptr, colidx, vals)

    def select_columns(self, cols):
        cols = np.asarray(cols, dtype=np.int64)
        indptr = [0]
        indices = []
        data = []
        for j in cols:
            r, v = self.column_pattern(j)
            indices.append(r)
            data.append(v)
            indptr.append(indptr[-1] + r.size)
        if indices:
            indices = np.concatenate(indices)
            data = np.concatenate(data)
        else:
            indices = np.zeros(0, dtype=np.int64)
            data = np.zeros(0)
        return SparseMatrix(self.num_rows, cols.size, np.array(indptr), indices, data)

    def hstack(self, other):
        if other.num_rows != self.num_rows:
            raise DimensionError("row counts differ")
        indptr = np.concatenate((self.indptr, other.indptr[1:] + self.nnz))
        return SparseMatrix(
            self.num_rows,
            self.num_cols + other.num_cols,
            indptr,
            np.concatenate((self.indices, other.indices)),
            np.concatenate((self.data, other.data)),
        )

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None


def _vector(v, size, what):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != size:
        raise DimensionError(f"{what}: expected vector of length {size}, got shape {v.shape}")
    return v


def matvec(M, v):
    """Return ``M @ v``."""
    v = _vector(v, M.num_cols, "matvec")
    return kernels.csc_matvec(M.indptr, M.indices, M.data, v, M.num_rows)


def matvec_transpose(M, v):
    """Return ``M.T @ v``."""
    v = _vector(v, M.num_rows, "matvec_transpose")
    return kernels.csc_rmatvec(M.indptr, M.indices, M.data, v)


def normal_apply(A, d, v):
    """Return ``A @ (d**2 * (A.T @ v))`` without forming ``A D^2 A^T``."""
    d = _vector(d, A.num_cols, "normal_apply weights")
    if np.any(d <= 0):
        raise ValueError("normal_apply requires strictly positive weights")
    v = _vector(v, A.num_rows, "normal_apply")
    return kernels.csc_normal_apply(A.indptr, A.indices, A.data, d * d, v)


def normal_diagonal(A, d):
    """Diagonal of ``A D^2 A^T``."""
    d = _vector(d, A.num_cols, "normal_diagonal weights")
    return kernels.csc_normal_diagonal(A.indptr, A.indices, A.data, d * d, A.num_rows)
