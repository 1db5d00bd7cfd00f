"""Scaled Newton system, exact and inexact directions, residual conditions.

At an interior iterate ``(x, y, z)`` with ``D = X^{1/2} Z^{-1/2}`` and
``w = (x z)^{1/2}`` the Newton step in scaled variables ``du = D^-1 dx``,
``dv = D dz`` solves

    A D du          = p = b - A x
    D A^T dy + dv   = q = D (c - A^T y - z)
    du + dv         = r + xi,     r = -w + mu / w

where ``xi`` is zero for the exact direction. Inexact directions keep the
first two rows exact and confine ``xi`` to the columns of a basis.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    ACCEPTED,
    CgOutcome,
    DENSE_ORACLE_CAP,
    basis_solve,
    basis_solve_transpose,
    conjugate_gradients,
    matvec,
    matvec_transpose,
    normal_apply,
    normal_diagonal,
    select_basis,
)
from .potential import DomainError

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
MODES = (FEASIBLE, INFEASIBLE)
CONDITION_VARIANTS = ("paper", "monteiro", "gondzio")

# (6b) with min(||du||, ||dv||) == 0
DEGENERATE_XI_TOL = 1e-12
SKIPPED = "skipped"


class DirectionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ScaledSystem:
    lp: object
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    nu: float
    d: np.ndarray
    w: np.ndarray
    w_min: float
    mu: float
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def m(self):
        return self.y.shape[0]

    @property
    def gap(self):
        return float(self.x @ self.z)


@dataclass(frozen=True, eq=False)
class Direction:
    du: np.ndarray
    dy: np.ndarray
    dv: np.ndarray
    dx: np.ndarray
    dz: np.ndarray
    xi: np.ndarray
    basic_support: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def unscaled_residual(sys, direction):
    """Residual of the unscaled complementarity row ``Z dx + X dz``: ``W xi``."""
    return sys.w * direction.xi


@dataclass(frozen=True)
class ConditionReport:
    lhs_6a: float
    rhs_6a: float
    lhs_6b: float
    rhs_6b: float
    lhs_6c: float
    rhs_6c: float
    kappa: float
    mode: str

    @property
    def holds_6a(self):
        return self.lhs_6a <= self.rhs_6a

    @property
    def holds_6b(self):
        return self.lhs_6b <= self.rhs_6b

    @property
    def holds_6c(self):
        return self.lhs_6c <= self.rhs_6c

    @property
    def passes(self):
        ok = self.holds_6a and self.holds_6b
        return ok and self.holds_6c if self.mode == INFEASIBLE else ok


@dataclass(frozen=True)
class AltCondition:
    holds: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class InnerControls:
    """Settings of the inner CG solve.

    ``max_iters`` defaults to ``10 m``; ``check_every`` to 1 for
    ``m <= 2000`` and 5 above. ``preconditioner`` is ``"diagonal"`` or
    ``"basis"``.
    """

    max_iters: int | None = None
    check_every: int | None = None
    preconditioner: str = "diagonal"
    condition: str = "paper"
    sigma: float = 0.5
    gamma: float = 0.5
    eta: float = 0.5
    break_lift: bool = False


@dataclass(frozen=True)
class InnerStats:
    cg_iterations: int
    stop_reason: str
    fallback: bool
    basic: np.ndarray
    variant_lhs: float = float("nan")
    variant_rhs: float = float("nan")


def build_scaled_system(lp, iterate, nu):
    """Scaling, target ``mu = x^T z / (n + nu)`` and right-hand sides at ``iterate``."""
    x = np.asarray(iterate.x, dtype=np.float64)
    y = np.asarray(iterate.y, dtype=np.float64)
    z = np.asarray(iterate.z, dtype=np.float64)
    if not (np.all(x > 0) and np.all(z > 0)):
        raise DomainError("iterate is not interior: x and z must be strictly positive")
    n = x.shape[0]
    d = np.sqrt(x / z)
    w = np.sqrt(x * z)
    mu = float(x @ z) / (n + nu)
    p = lp.b - matvec(lp.A, x)
    q = d * (lp.c - matvec_transpose(lp.A, y) - z)
    r = -w + mu / w
    return ScaledSystem(lp, x, y, z, float(nu), d, w, float(w.min()), mu, p, q, r)


def _unscale(sys, du, dy, dv, xi, support):
    return Direction(du, dy, dv, sys.d * du, dv / sys.d, xi, support)


def _dense_scaled(sys):
    if sys.m > DENSE_ORACLE_CAP:
        raise DirectionError(f"dense oracle limited to m <= {DENSE_ORACLE_CAP}")
    return sys.lp.A.to_dense() * sys.d


def solve_with_residual(sys, xi):
    """Exact solution of the scaled system with ``r`` replaced by ``r + xi``.

    Applies the projector ``P = D A^T (A D^2 A^T)^{-1} A D`` through a thin QR
    factorization ``D A^T = Q R``, so ``P = Q Q^T`` and ``A D^2 A^T = R^T R``.
    Working with ``Q`` keeps ``du`` and ``dv`` orthogonal to working precision
    late in a run, where ``A D^2 A^T`` is badly conditioned. ``xi = 0`` gives
    the exact Newton direction.
    """
    xi = np.asarray(xi, dtype=np.float64)
    AD = _dense_scaled(sys)
    rr = sys.r + xi
    if sys.m:
        Q, R = scipy.linalg.qr(AD.T, mode="economic")
        if np.any(np.abs(np.diag(R)) <= np.finfo(float).eps * np.abs(R).max() * sys.m):
            raise DirectionError("A D^2 A^T is numerically singular")
        # t = R^-T p gives A D^2 A^T sol = p with sol = R^-1 t and D A^T sol = Q t
        t = scipy.linalg.solve_triangular(R, sys.p, trans="T")
        cq = Q.T @ sys.q
        cr = Q.T @ rr
        lift_p = Q @ t
        proj_q = Q @ cq
        proj_r = Q @ cr
        dy = scipy.linalg.solve_triangular(R, t + cq - cr)
    else:
        lift_p = proj_q = proj_r = np.zeros(sys.n)
        dy = np.zeros(0)
    du = lift_p - (sys.q - proj_q) + (rr - proj_r)
    dv = -lift_p + (sys.q - proj_q) + proj_r
    support = np.flatnonzero(xi) if np.any(xi) else np.zeros(0, dtype=np.int64)
    return _unscale(sys, du, dy, dv, xi.copy(), support)


def exact_directions(sys):
    """Oracle: exact Newton direction via the dense projector formulas."""
    return solve_with_residual(sys, np.zeros(sys.n))


def check_conditions(sys, direction, kappa, mode=FEASIBLE):
    """Evaluate the three residual conditions.

    (6a) ``-r^T xi <= kappa ||r||^2``
    (6b) ``||xi|| <= kappa min(||du||, ||dv||)``
    (6c) ``-w^T xi <= kappa n / (n + nu) ||w||^2``

    (6c) is always evaluated; it only gates ``passes`` in infeasible mode.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    xi = direction.xi
    r, w = sys.r, sys.w
    n = sys.n
    floor = min(np.linalg.norm(direction.du), np.linalg.norm(direction.dv))
    rhs_b = kappa * floor if floor > 0.0 else DEGENERATE_XI_TOL
    return ConditionReport(
        lhs_6a=float(-(r @ xi)),
        rhs_6a=float(kappa * (r @ r)),
        lhs_6b=float(np.linalg.norm(xi)),
        rhs_6b=float(rhs_b),
        lhs_6c=float(-(w @ xi)),
        rhs_6c=float(kappa * n / (n + sys.nu) * (w @ w)),
        kappa=float(kappa),
        mode=mode,
    )


def alt_condition_monteiro(xi_B, sigma, gamma, n, gap):
    """``||xi_B|| <= (1 - gamma) sigma / (4 sqrt(n)) * sqrt(gap / n)``."""
    lhs = float(np.linalg.norm(xi_B))
    rhs = float((1.0 - gamma) * sigma / (4.0 * np.sqrt(n)) * np.sqrt(gap / n))
    return AltCondition(lhs <= rhs, lhs, rhs)


def alt_condition_gondzio(w_B, xi_B, eta, n, gap):
    """``||W_B xi_B||_inf <= eta * gap / n``."""
    w_B = np.asarray(w_B, dtype=np.float64)
    xi_B = np.asarray(xi_B, dtype=np.float64)
    lhs = float(np.abs(w_B * xi_B).max(initial=0.0))
    rhs = float(eta * gap / n)
    return AltCondition(lhs <= rhs, lhs, rhs)


def _variant_check(sys, xi, basic, inner):
    if inner.condition == "monteiro":
        return alt_condition_monteiro(xi[basic], inner.sigma, inner.gamma, sys.n, sys.gap)
    if inner.condition == "gondzio":
        return alt_condition_gondzio(sys.w[basic], xi[basic], inner.eta, sys.n, sys.gap)
    return None


def _preconditioner(sys, fac, kind):
    if kind == "diagonal":
        diag = normal_diagonal(sys.lp.A, sys.d)
        diag[diag <= 0.0] = 1.0
        inv = 1.0 / diag
        return lambda v: inv * v
    if kind == "basis":
        inv_d2 = 1.0 / sys.d[fac.basic] ** 2
        return lambda v: basis_solve_transpose(fac, inv_d2 * basis_solve(fac, v))
    raise ValueError(f"unknown preconditioner {kind!r}")


def inexact_directions(sys, kappa, mode=FEASIBLE, inner=None):
    """Truncated-CG direction with the residual confined to basic columns.

    CG runs on ``A D^2 A^T dy = p + A D (q - r)``. For each iterate ``dy``
    with residual ``s`` the candidate is ``dv = q - D A^T dy``, ``xi`` the
    vector supported on the basis with ``A D xi = s``, and
    ``du = r + xi - dv``; the primal and dual rows then hold exactly. The
    first candidate passing the conditions for ``mode`` (or the alternative
    acceptance rule selected in ``inner.condition``) is returned. If none
    passes within the iteration cap the exact direction is returned. With
    ``kappa = 0`` under the default rule only ``xi = 0`` is admissible, so
    CG is skipped (stop reason ``skipped``) and the exact direction used.

    Returns
    -------
    (Direction, ConditionReport, InnerStats)
    """
    if not 0.0 <= kappa < 1.0:
        raise ValueError("kappa must lie in [0, 1)")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    inner = inner or InnerControls()
    if inner.condition not in CONDITION_VARIANTS:
        raise ValueError(f"condition must be one of {CONDITION_VARIANTS}")
    lp = sys.lp
    m, n = sys.m, sys.n
    fac = select_basis(lp.A, sys.d)
    basic = fac.basic
    d_basic = sys.d[basic]
    g = sys.p + matvec(lp.A, sys.d * (sys.q - sys.r))
    max_iters = inner.max_iters if inner.max_iters is not None else 10 * m
    check_every = inner.check_every or (1 if m <= 2000 else 5)
    found = {}

    def candidate(outcome):
        xi = np.zeros(n)
        xi[basic] = basis_solve(fac, outcome.residual) / d_basic
        dv = sys.q - sys.d * matvec_transpose(lp.A, outcome.solution)
        du = sys.r + xi - dv
        return _unscale(sys, du, outcome.solution, dv, xi, basic)

    def accept(outcome):
        direction = candidate(outcome)
        report = check_conditions(sys, direction, kappa, mode)
        variant = _variant_check(sys, direction.xi, basic, inner)
        ok = report.passes if variant is None else variant.holds
        if ok:
            found.update(direction=direction, report=report, variant=variant)
        return ok

    if kappa == 0.0 and inner.condition == "paper" and np.any(g):
        # only xi = 0 is admissible, which truncated CG cannot deliver
        outcome = CgOutcome(np.zeros(m), g, 0, SKIPPED)
    else:
        outcome = conjugate_gradients(
            lambda v: normal_apply(lp.A, sys.d, v),
            g,
            precond=_preconditioner(sys, fac, inner.preconditioner),
            accept=accept,
            max_iters=max_iters,
            check_every=check_every,
        )
    if outcome.stop_reason == ACCEPTED:
        direction, report, variant = found["direction"], found["report"], found["variant"]
        fallback = False
    else:
        try:
            direction = exact_directions(sys)
        except Exception as exc:
            raise DirectionError(f"CG stopped ({outcome.stop_reason}) and the exact fallback failed: {exc}") from exc
        report = check_conditions(sys, direction, kappa, mode)
        variant = _variant_check(sys, direction.xi, basic, inner)
        fallback = True
    if inner.break_lift and n > m:
        direction = _break_lift(direction, basic, n)
    stats = InnerStats(
        outcome.iterations,
        outcome.stop_reason,
        fallback,
        basic,
        variant.lhs if variant is not None else float("nan"),
        variant.rhs if variant is not None else float("nan"),
    )
    return direction, report, stats


def _break_lift(direction, basic, n):
    # negative control: move the residual onto a nonbasic position
    nonbasic = np.setdiff1d(np.arange(n), basic)
    xi = direction.xi.copy()
    j = nonbasic[0]
    moved = xi[basic[0]] if xi[basic[0]] != 0.0 else 1e-3
    xi[basic[0]] = 0.0
    xi[j] = moved
    return Direction(direction.du, direction.dy, direction.dv, direction.dx, direction.dz,
                     xi, direction.basic_support)


def block_residuals(sys, direction):
    """Relative residuals of the three block rows for ``direction``.

    Returns ``(primal, dual, third)`` with primal ``||A D du - p|| / (1 + ||p||)``,
    dual ``||D A^T dy + dv - q|| / (1 + ||q||)`` and third
    ``||du + dv - r - xi|| / (1 + ||r||)``.
    """
    A = sys.lp.A
    primal = np.linalg.norm(matvec(A, sys.d * direction.du) - sys.p) / (1.0 + np.linalg.norm(sys.p))
    dual = np.linalg.norm(sys.d * matvec_transpose(A, direction.dy) + direction.dv - sys.q) / (
        1.0 + np.linalg.norm(sys.q)
    )
    third = np.linalg.norm(direction.du + direction.dv - sys.r - direction.xi) / (
        1.0 + np.linalg.norm(sys.r)
    )
    return float(primal), float(dual), float(third)


def xi_support_ok(direction, basic):
    outside = np.ones(direction.xi.shape[0], dtype=bool)
    outside[np.asarray(basic, dtype=np.int64)] = False
    return bool(np.all(direction.xi[outside] == 0.0))


@dataclass(frozen=True)
class RelativeErrorReport:
    rel_err_du: float
    rel_err_dv: float
    bound: float
    degenerate: bool
    du_lower_ok: bool
    dv_lower_ok: bool

    @property
    def within_bound(self):
        return self.degenerate or (self.rel_err_du <= self.bound and self.rel_err_dv <= self.bound)


def relative_error_report(direction, exact, kappa, degenerate_tol=1e-10):
    """Relative errors of ``(du, dv)`` against the exact direction.

    Also checks ``||du*|| >= (1 - kappa) ||du||`` and the same for ``dv``.
    ``degenerate`` is set when ``||du*||`` or ``||dv*||`` is below
    ``degenerate_tol`` times ``||(du*, dv*)||``; the ratios are then NaN.
    """
    nu_star = np.linalg.norm(exact.du)
    nv_star = np.linalg.norm(exact.dv)
    scale = np.hypot(nu_star, nv_star)
    bound = kappa / (1.0 - kappa)
    du_low = bool(nu_star >= (1.0 - kappa) * np.linalg.norm(direction.du) - 1e-12 * scale)
    dv_low = bool(nv_star >= (1.0 - kappa) * np.linalg.norm(direction.dv) - 1e-12 * scale)
    if scale == 0.0 or min(nu_star, nv_star) <= degenerate_tol * scale:
        return RelativeErrorReport(float("nan"), float("nan"), bound, True, du_low, dv_low)
    return RelativeErrorReport(
        float(np.linalg.norm(direction.du - exact.du) / nu_star),
        float(np.linalg.norm(direction.dv - exact.dv) / nv_star),
        bound,
        False,
        du_low,
        dv_low,
    )
