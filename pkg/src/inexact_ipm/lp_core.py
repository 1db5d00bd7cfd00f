"""Standard-form LP data, file formats, rank validation and instance generators.

Instances are drawn with ``numpy.random.default_rng(seed)`` (the PCG64 bit
generator), so a seed fixes an instance bit for bit.
"""

import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr
from scipy.optimize import linprog

from .linalg.sparse import SparseMatrix, matvec, matvec_transpose

RANK_PIVOT_RATIO = 1e-10
MAX_RESAMPLES = 100


class ParseError(ValueError):
    """Malformed LP input; carries the offending line number."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min c^T x  s.t.  A x = b, x >= 0`` with ``A`` stored column-wise."""

    A: SparseMatrix
    b: np.ndarray
    c: np.ndarray
    name: str = "lp"

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64)
        c = np.array(self.c, dtype=np.float64)
        if b.shape != (self.A.num_rows,):
            raise ValueError(f"b must have length {self.A.num_rows}")
        if c.shape != (self.A.num_cols,):
            raise ValueError(f"c must have length {self.A.num_cols}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("b and c must be finite")
        b.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def num_rows(self):
        return self.A.num_rows

    @property
    def num_cols(self):
        return self.A.num_cols

    @classmethod
    def from_dense(cls, A, b, c, name="lp"):
        return cls(SparseMatrix.from_dense(A), b, c, name)

    def same_data(self, other):
        return (
            self.A == other.A
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    lp: LinearProgram
    seed: int
    strict_start: tuple | None = None
    known_optimum: tuple | None = None

    @property
    def optimum_norm(self):
        """``max(||x*||_inf, ||z*||_inf)``, or None without a known optimum."""
        if self.known_optimum is None:
            return None
        x, _, z = self.known_optimum
        return float(max(np.abs(x).max(), np.abs(z).max()))


@dataclass(frozen=True)
class RankReport:
    full_rank: bool
    rank: int
    pivot_ratio: float
    threshold: float = RANK_PIVOT_RATIO


def validate_rank(lp_or_matrix, threshold=RANK_PIVOT_RATIO):
    """Numerical row rank of ``A`` from a column-pivoted QR of ``A^T``.

    ``pivot_ratio`` is ``|R[k-1,k-1]| / |R[0,0]|`` with ``k = min(m, n)``;
    a diagonal entry below ``threshold * |R[0,0]|`` counts as zero.
    """
    A = lp_or_matrix.A if isinstance(lp_or_matrix, LinearProgram) else lp_or_matrix
    m, n = A.shape
    if m == 0:
        return RankReport(True, 0, 1.0, threshold)
    R = qr(A.to_dense().T, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return RankReport(False, 0, 0.0, threshold)
    ratios = diag / diag[0]
    rank = int(np.count_nonzero(ratios >= threshold))
    return RankReport(rank == m and m <= n, rank, float(ratios[-1]), threshold)


# -- MPS ----------------------------------------------------------------------

_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "ENDATA")
_UNSUPPORTED = ("RANGES", "BOUNDS", "OBJSENSE", "SOS")


def _number(token, lineno):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(lineno, f"non-numeric field {token!r}") from None
    if not np.isfinite(value):
        raise ParseError(lineno, f"non-finite value {token!r}")
    return value


def parse_mps(text, name=None):
    """Parse the fixed-form MPS subset into a standard-form LP.

    ``L`` rows gain a slack column with coefficient +1 and ``G`` rows one
    with coefficient -1; slack columns follow the structural columns in row
    order. The single ``N`` row becomes ``c``.
    """
    if not isinstance(text, str):
        text = text.read()
    lp_name = name
    section = None
    seen = set()
    last_rank = -1
    obj_row = None
    row_kind = {}
    row_order = []
    col_index = {}
    col_order = []
    entries = {}
    cost = {}
    rhs = {}
    current_col = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        fields = line.split()
        if not raw[0].isspace():
            head = fields[0].upper()
            if head in _UNSUPPORTED:
                raise ParseError(lineno, f"section {head} is not supported (standard form only)")
            if head not in _SECTIONS:
                raise ParseError(lineno, f"unknown section {fields[0]!r}")
            rank = _SECTIONS.index(head)
            if rank <= last_rank or (rank >= 2 and "ROWS" not in seen) or (
                rank >= 3 and "COLUMNS" not in seen
            ):
                raise ParseError(lineno, f"section {head} out of order")
            if head == "NAME" and lp_name is None and len(fields) > 1:
                lp_name = fields[1]
            if head == "COLUMNS" and not row_order:
                raise ParseError(lineno, "empty ROWS section")
            seen.add(head)
            last_rank = rank
            section = head
            if head == "ENDATA":
                break
            continue

        if section == "ROWS":
            if len(fields) != 2:
                raise ParseError(lineno, "ROWS entry needs a type and a name")
            kind, rname = fields[0].upper(), fields[1]
            if kind not in ("N", "E", "L", "G"):
                raise ParseError(lineno, f"unknown row type {fields[0]!r}")
            if rname in row_kind:
                raise ParseError(lineno, f"duplicate row name {rname!r}")
            if kind == "N":
                if obj_row is not None:
                    raise ParseError(lineno, "more than one objective row")
                obj_row = rname
            else:
                row_order.append(rname)
            row_kind[rname] = kind
        elif section == "COLUMNS":
            if len(fields) not in (3, 5):
                raise ParseError(lineno, "COLUMNS entry needs a column name and one or two (row, value) pairs")
            cname = fields[0]
            if cname != current_col:
                if cname in col_index:
                    raise ParseError(lineno, f"duplicate column name {cname!r}")
                col_index[cname] = len(col_order)
                col_order.append(cname)
                current_col = cname
            j = col_index[cname]
            for rname, tok in zip(fields[1::2], fields[2::2]):
                value = _number(tok, lineno)
                if rname not in row_kind:
                    raise ParseError(lineno, f"row {rname!r} was not declared in ROWS")
                if rname == obj_row:
                    if j in cost:
                        raise ParseError(lineno, f"duplicate objective entry for {cname!r}")
                    cost[j] = value
                else:
                    key = (rname, j)
                    if key in entries:
                        raise ParseError(lineno, f"duplicate entry ({rname!r}, {cname!r})")
                    entries[key] = value
        elif section == "RHS":
            if len(fields) not in (3, 5):
                raise ParseError(lineno, "RHS entry needs a set name and one or two (row, value) pairs")
            for rname, tok in zip(fields[1::2], fields[2::2]):
                value = _number(tok, lineno)
                if rname not in row_kind:
                    raise ParseError(lineno, f"row {rname!r} was not declared in ROWS")
                if rname == obj_row:
                    raise ParseError(lineno, "objective constants are not supported")
                if rname in rhs:
                    raise ParseError(lineno, f"duplicate right-hand side for {rname!r}")
                rhs[rname] = value
        else:
            raise ParseError(lineno, "data line outside of a section")
    else:
        raise ParseError(len(text.splitlines()), "missing ENDATA")

    if not row_order:
        raise ParseError(1, "empty ROWS section")
    if obj_row is None:
        raise ParseError(1, "no objective (N) row")

    m = len(row_order)
    n_struct = len(col_order)
    row_pos = {r: i for i, r in enumerate(row_order)}
    rows, cols, vals = [], [], []
    for (rname, j), value in entries.items():
        if value != 0.0:
            rows.append(row_pos[rname])
            cols.append(j)
            vals.append(value)
    n = n_struct
    for i, rname in enumerate(row_order):
        kind = row_kind[rname]
        if kind in ("L", "G"):
            rows.append(i)
            cols.append(n)
            vals.append(1.0 if kind == "L" else -1.0)
            n += 1
    A = SparseMatrix.from_triplets(m, n, rows, cols, vals)
    c = np.zeros(n)
    for j, value in cost.items():
        c[j] = value
    b = np.array([rhs.get(r, 0.0) for r in row_order])
    return LinearProgram(A, b, c, lp_name or "lp")


def write_mps(lp):
    """Serialize a standard-form LP as MPS with equality rows only."""
    out = io.StringIO()
    m, n = lp.A.shape
    out.write(f"NAME          {lp.name}\n")
    out.write("ROWS\n N  COST\n")
    for i in range(m):
        out.write(f" E  R{i}\n")
    out.write("COLUMNS\n")
    for j in range(n):
        rows, vals = lp.A.column_pattern(j)
        wrote = False
        if lp.c[j] != 0.0 or rows.size == 0:
            out.write(f"    X{j}  COST  {float(lp.c[j])!r}\n")
            wrote = True
        for i, v in zip(rows, vals):
            out.write(f"    X{j}  R{i}  {float(v)!r}\n")
            wrote = True
        assert wrote
    out.write("RHS\n")
    for i in range(m):
        if lp.b[i] != 0.0:
            out.write(f"    RHS  R{i}  {float(lp.b[i])!r}\n")
    out.write("ENDATA\n")
    return out.getvalue()


# -- native triplet format ----------------------------------------------------

def parse_triplets(text, name="lp"):
    """Parse ``m n nnz`` / ``row col value`` lines (0-based) / ``b`` / ``c``."""
    if not isinstance(text, str):
        text = text.read()
    lines = [
        (no, ln.split("#", 1)[0].split())
        for no, ln in enumerate(text.splitlines(), start=1)
    ]
    lines = [(no, f) for no, f in lines if f]
    if not lines:
        raise ParseError(1, "empty input")
    no, head = lines[0]
    if len(head) != 3:
        raise ParseError(no, "header must be 'm n nnz'")
    try:
        m, n, nnz = (int(t) for t in head)
    except ValueError:
        raise ParseError(no, "header fields must be integers") from None
    if m < 1 or n < 1 or nnz < 0:
        raise ParseError(no, "invalid dimensions")
    if len(lines) < 1 + nnz:
        raise ParseError(lines[-1][0], "fewer triplet lines than nnz")
    rows, cols, vals = [], [], []
    seen = set()
    for no, f in lines[1:1 + nnz]:
        if len(f) != 3:
            raise ParseError(no, "triplet line must be 'row col value'")
        try:
            i, j = int(f[0]), int(f[1])
        except ValueError:
            raise ParseError(no, "row and column must be integers") from None
        if not (0 <= i < m and 0 <= j < n):
            raise ParseError(no, f"index ({i}, {j}) out of range")
        if (i, j) in seen:
            raise ParseError(no, f"duplicate entry ({i}, {j})")
        seen.add((i, j))
        rows.append(i)
        cols.append(j)
        vals.append(_number(f[2], no))
    tokens = [(no, t) for no, f in lines[1 + nnz:] for t in f]
    if len(tokens) != m + n:
        where = tokens[-1][0] if tokens else lines[-1][0]
        raise ParseError(where, f"expected {m} + {n} values for b and c, found {len(tokens)}")
    values = np.array([_number(t, no) for no, t in tokens])
    A = SparseMatrix.from_triplets(m, n, rows, cols, vals)
    return LinearProgram(A, values[:m], values[m:], name)


def write_triplets(lp):
    out = io.StringIO()
    m, n = lp.A.shape
    out.write(f"{m} {n} {lp.A.nnz}\n")
    for j in range(n):
        rows, vals = lp.A.column_pattern(j)
        for i, v in zip(rows, vals):
            out.write(f"{i} {j} {float(v)!r}\n")
    out.write(" ".join(repr(float(v)) for v in lp.b) + "\n")
    out.write(" ".join(repr(float(v)) for v in lp.c) + "\n")
    return out.getvalue()


def read_lp(path):
    """Load an LP from ``.mps`` or the triplet format (any other suffix)."""
    path = str(path)
    with open(path) as fh:
        text = fh.read()
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    if path.lower().endswith(".mps"):
        return parse_mps(text)
    return parse_triplets(text, name=stem)


# -- generators ---------------------------------------------------------------

def _random_sparse(rng, m, n, density):
    mask = rng.random((m, n)) < density
    values = rng.uniform(-1.0, 1.0, size=(m, n))
    return np.where(mask, values, 0.0)


def generate_feasible_instance(seed, m, n, density=1.0):
    """LP with a known strictly feasible point ``(x0, y0, z0)``.

    ``x0, z0 ~ U[0.5, 2]`` and ``y0 ~ U[-1, 1]`` componentwise; ``b`` and
    ``c`` are defined from them, so the point lies in the strictly feasible
    set by construction.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES):
        A = SparseMatrix.from_dense(_random_sparse(rng, m, n, density))
        if validate_rank(A).full_rank:
            break
    else:
        raise GenerationError(f"no full-rank matrix after {MAX_RESAMPLES} draws")
    x0 = rng.uniform(0.5, 2.0, size=n)
    z0 = rng.uniform(0.5, 2.0, size=n)
    y0 = rng.uniform(-1.0, 1.0, size=m)
    b = matvec(A, x0)
    c = matvec_transpose(A, y0) + z0
    lp = LinearProgram(A, b, c, f"feasible-m{m}-n{n}-s{seed}")
    return GeneratedInstance(lp, seed, strict_start=(x0, y0, z0))


def generate_bounded_optimal_instance(seed, m, n, rho_target, density=1.0):
    """LP with a known strictly complementary optimum bounded by ``rho_target / 2``."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    if not rho_target > 1.0:
        raise ValueError("rho_target must exceed 1")
    rng = np.random.default_rng(seed)
    basic = np.sort(rng.choice(n, size=m, replace=False))
    nonbasic = np.setdiff1d(np.arange(n), basic)
    for _ in range(MAX_RESAMPLES):
        dense = _random_sparse(rng, m, n, density)
        if validate_rank(SparseMatrix.from_dense(dense[:, basic])).full_rank:
            break
    else:
        raise GenerationError(f"no nonsingular basic block after {MAX_RESAMPLES} draws")
    A = SparseMatrix.from_dense(dense)
    hi = rho_target / 2.0
    lo = min(1.0, hi)
    x_star = np.zeros(n)
    z_star = np.zeros(n)
    x_star[basic] = rng.uniform(lo, hi, size=m)
    z_star[nonbasic] = rng.uniform(lo, hi, size=n - m)
    y_star = rng.uniform(-1.0, 1.0, size=m)
    b = matvec(A, x_star)
    c = matvec_transpose(A, y_star) + z_star
    lp = LinearProgram(A, b, c, f"bounded-m{m}-n{n}-s{seed}")
    return GeneratedInstance(lp, seed, known_optimum=(x_star, y_star, z_star))


class NoStrictlyFeasiblePoint(ValueError):
    pass


def find_strict_start(lp, margin=1e-9):
    """A point of the strictly feasible set, or NoStrictlyFeasiblePoint.

    Solves two auxiliary LPs with HiGHS: ``max t`` over ``A x = b, x >= t,
    t <= 1`` and ``max s`` over ``c - A^T y >= s, s <= 1``. A positive optimum
    in both gives an interior start; ``x`` is then projected back onto
    ``A x = b`` and ``z`` is set to ``c - A^T y``.
    """
    m, n = lp.A.shape
    A = lp.A.to_dense()
    # primal: variables (x, t)
    res = linprog(
        np.r_[np.zeros(n), -1.0],
        A_ub=np.c_[-np.eye(n), np.ones(n)], b_ub=np.zeros(n),
        A_eq=np.c_[A, np.zeros(m)], b_eq=lp.b,
        bounds=[(None, None)] * n + [(None, 1.0)], method="highs",
    )
    if res.status != 0 or -res.fun <= margin:
        raise NoStrictlyFeasiblePoint("no primal point with A x = b and x > 0")
    x = res.x[:n]
    x = x - A.T @ np.linalg.lstsq(A @ A.T, A @ x - lp.b, rcond=None)[0]
    # dual: variables (y, s)
    res = linprog(
        np.r_[np.zeros(m), -1.0],
        A_ub=np.c_[A.T, np.ones(n)], b_ub=lp.c,
        bounds=[(None, None)] * m + [(None, 1.0)], method="highs",
    )
    if res.status != 0 or -res.fun <= margin:
        raise NoStrictlyFeasiblePoint("no dual point with A^T y + z = c and z > 0")
    y = res.x[:m]
    z = lp.c - matvec_transpose(lp.A, y)
    if not (np.all(x > 0) and np.all(z > 0)):
        raise NoStrictlyFeasiblePoint("strict start lost positivity after projection")
    return x, y, z
