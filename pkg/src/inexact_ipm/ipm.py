"""Feasible and infeasible inexact potential reduction methods.

Both methods take at every iteration an inexact Newton direction towards
``mu = x^T z / (n + nu)`` and a step that lowers the potential by a fixed
amount ``delta``. The feasible method needs a strictly feasible start; the
infeasible one starts at ``rho (e, 0, e)``, additionally requires the new
gap to be at least ``(1 - alpha)`` times the old one, and reports an
infeasibility certificate when no step passes both tests.
"""

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import matvec, matvec_transpose
from .potential import DomainError, phi
from .scaled_newton import (
    FEASIBLE,
    INFEASIBLE,
    DirectionError,
    InnerControls,
    build_scaled_system,
    check_conditions,
    exact_directions,
    inexact_directions,
)

OPTIMAL = "optimal"
CERTIFICATE = "infeasibility-certificate"
ITERATION_LIMIT = "iteration-limit"
NUMERICAL_FAILURE = "numerical-failure"

LOG_COLUMNS = (
    "k", "gap", "phi", "delta_achieved", "alpha", "theta", "norm_xi",
    "cond6a_lhs", "cond6a_rhs", "cond6b_lhs", "cond6b_rhs", "cond6c_lhs", "cond6c_rhs",
    "cg_iters", "wmin", "norm_r",
)

DECREASE_SLACK = 1e-10


class ParameterError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Iterate:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    k: int = 0
    theta: float = 1.0


@dataclass(frozen=True)
class SolveParams:
    """Solver controls; ``nu`` defaults to ``sqrt(n)``.

    ``delta`` is derived: ``0.15 (1 - kappa)^4`` in feasible mode and
    ``(1 - kappa)^4 / (1600 (n + nu)^2)`` in infeasible mode.
    """

    nu: float | None = None
    kappa: float = 0.5
    epsilon: float = 1e-8
    rho: float = 1e4
    max_outer: int | None = None
    backtrack: float = 0.5
    max_trials: int = 40
    step_fraction: float = 0.99
    inner: InnerControls = field(default_factory=InnerControls)

    def nu_for(self, n):
        return math.sqrt(n) if self.nu is None else float(self.nu)

    def delta(self, mode, n):
        nu = self.nu_for(n)
        if mode == FEASIBLE:
            return 0.15 * (1.0 - self.kappa) ** 4
        return (1.0 - self.kappa) ** 4 / (1600.0 * (n + nu) ** 2)

    def validate(self, mode, n):
        nu = self.nu_for(n)
        if not 0.0 <= self.kappa < 1.0:
            raise ParameterError(f"kappa = {self.kappa} must lie in [0, 1)")
        if not self.epsilon > 0.0:
            raise ParameterError("epsilon must be positive")
        if nu < math.sqrt(n) * (1.0 - 1e-15):
            raise ParameterError(f"nu = {nu} must be at least sqrt(n) = {math.sqrt(n)}")
        if mode == INFEASIBLE:
            if nu > 2 * n:
                raise ParameterError(f"nu = {nu} must not exceed 2n = {2 * n} in infeasible mode")
            if not self.rho > 0.0:
                raise ParameterError("rho must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise ParameterError("backtracking factor must lie in (0, 1)")
        if not 0.0 < self.step_fraction < 1.0:
            raise ParameterError("step fraction must lie in (0, 1)")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    gap: float
    phi: float
    delta_achieved: float
    alpha: float
    theta: float
    norm_xi: float
    cond6a_lhs: float
    cond6a_rhs: float
    cond6b_lhs: float
    cond6b_rhs: float
    cond6c_lhs: float
    cond6c_rhs: float
    cg_iters: int
    wmin: float
    norm_r: float
    mu: float = float("nan")
    step_source: str = "grid"
    guaranteed_alpha: float = float("nan")
    guaranteed_ok: bool = True
    fallback: bool = False
    primal_res: float = 0.0
    dual_res: float = 0.0
    x_min: float = float("nan")
    z_min: float = float("nan")
    variant_lhs: float = float("nan")
    variant_rhs: float = float("nan")

    def csv_row(self):
        return [getattr(self, c) for c in LOG_COLUMNS]


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: str
    iterate: Iterate
    log: tuple
    mode: str
    nu: float
    kappa: float
    epsilon: float
    delta: float
    phi0: float
    iteration_bound: int
    wall_time: float
    rho: float | None = None
    initial_primal_res: np.ndarray | None = None
    initial_dual_res: np.ndarray | None = None
    initial_gap: float | None = None
    message: str = ""

    @property
    def iterations(self):
        return self.iterate.k

    @property
    def gap(self):
        return float(self.iterate.x @ self.iterate.z)

    @property
    def total_cg_iterations(self):
        return sum(rec.cg_iters for rec in self.log)


@dataclass(frozen=True)
class StepChoice:
    alpha: float
    source: str
    phi_before: float
    phi_after: float

    @property
    def decrease(self):
        return self.phi_before - self.phi_after


def nonlinear_residual(lp, iterate, mu):
    """The three blocks ``A x - b``, ``A^T y + z - c`` and ``X z - mu e``."""
    x = np.asarray(iterate.x, dtype=np.float64)
    z = np.asarray(iterate.z, dtype=np.float64)
    return (
        matvec(lp.A, x) - lp.b,
        matvec_transpose(lp.A, iterate.y) + z - lp.c,
        x * z - mu,
    )


def iteration_bound(phi0, nu, epsilon, delta):
    """``ceil((phi0 - nu ln eps) / delta)``, the potential-decrease count bound."""
    return max(0, math.ceil((phi0 - nu * math.log(epsilon)) / delta))


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def _phi_at(iterate, direction, alpha, nu):
    try:
        return phi(iterate.x + alpha * direction.dx, iterate.z + alpha * direction.dz, nu).phi
    except DomainError:
        return math.inf


def _grid(iterate, direction, params, cap):
    bound = min(_max_step(iterate.x, direction.dx), _max_step(iterate.z, direction.dz), cap)
    if not math.isfinite(bound):
        bound = 1.0
    alpha = params.step_fraction * bound
    for _ in range(params.max_trials):
        yield alpha
        alpha *= params.backtrack


def feasible_guaranteed_alpha(sys, kappa):
    """Guaranteed feasible-mode step ``w_min (1 - kappa)^3 / (2 ||r||)``."""
    norm_r = float(np.linalg.norm(sys.r))
    if norm_r == 0.0:
        raise NumericalFailure("degenerate scaled system: r = 0")
    return sys.w_min * (1.0 - kappa) ** 3 / (2.0 * norm_r)


def infeasible_guaranteed_alpha(sys, kappa):
    """Guaranteed infeasible-mode step ``(1 - kappa)^3 w_min^2 / (200 (n + nu) x^T z)``."""
    return (1.0 - kappa) ** 3 * sys.w_min ** 2 / (200.0 * (sys.n + sys.nu) * sys.gap)


def gap_condition_holds(iterate, direction, alpha):
    """``(x + a dx)^T (z + a dz) >= (1 - a) x^T z``."""
    lhs = (iterate.x + alpha * direction.dx) @ (iterate.z + alpha * direction.dz)
    return bool(lhs >= (1.0 - alpha) * (iterate.x @ iterate.z))


def step_search_feasible(iterate, direction, sys, params, delta=None):
    """Backtracking search for a step lowering the potential by ``delta``.

    Trials start at ``step_fraction`` of the largest interior step and shrink
    by ``backtrack``. If all trials fail the guaranteed step is returned after
    checking that it achieves the decrease.

    Raises
    ------
    NumericalFailure
        If even the guaranteed step does not lower the potential by ``delta``.
    """
    if delta is None:
        delta = params.delta(FEASIBLE, sys.n)
    phi0 = phi(iterate.x, iterate.z, sys.nu).phi
    for alpha in _grid(iterate, direction, params, cap=math.inf):
        value = _phi_at(iterate, direction, alpha, sys.nu)
        if value <= phi0 - delta:
            return StepChoice(alpha, "grid", phi0, value)
    alpha = feasible_guaranteed_alpha(sys, params.kappa)
    value = _phi_at(iterate, direction, alpha, sys.nu)
    if value <= phi0 - delta + DECREASE_SLACK:
        return StepChoice(alpha, "guaranteed", phi0, value)
    raise NumericalFailure(
        f"guaranteed step {alpha:.3e} lowers the potential by {phi0 - value:.3e} < delta = {delta:.3e}"
    )


def step_search_infeasible(iterate, direction, sys, params, delta=None):
    """Step satisfying both the potential decrease and the gap condition, or None.

    The candidates are the backtracking grid (started at ``step_fraction``
    of ``min(1, largest interior step)``) followed by the guaranteed step.
    ``None`` means no candidate passes both tests.
    """
    if delta is None:
        delta = params.delta(INFEASIBLE, sys.n)
    phi0 = phi(iterate.x, iterate.z, sys.nu).phi
    candidates = list(_grid(iterate, direction, params, cap=1.0))
    candidates.append(infeasible_guaranteed_alpha(sys, params.kappa))
    for i, alpha in enumerate(candidates):
        value = _phi_at(iterate, direction, alpha, sys.nu)
        if value <= phi0 - delta and gap_condition_holds(iterate, direction, alpha):
            source = "guaranteed" if i == len(candidates) - 1 else "grid"
            return StepChoice(alpha, source, phi0, value)
    return None


def _residual_norms(lp, it):
    rp, rd, _ = nonlinear_residual(lp, it, 0.0)
    return rp, rd


def _record(k, it, sys, direction, report, stats, step, theta, guaranteed, rp, rd, phi_k):
    return IterationRecord(
        k=k,
        gap=sys.gap,
        phi=phi_k,
        delta_achieved=step.decrease if step else float("nan"),
        alpha=step.alpha if step else float("nan"),
        theta=theta,
        norm_xi=float(np.linalg.norm(direction.xi)),
        cond6a_lhs=report.lhs_6a,
        cond6a_rhs=report.rhs_6a,
        cond6b_lhs=report.lhs_6b,
        cond6b_rhs=report.rhs_6b,
        cond6c_lhs=report.lhs_6c,
        cond6c_rhs=report.rhs_6c,
        cg_iters=stats.cg_iterations,
        wmin=sys.w_min,
        norm_r=float(np.linalg.norm(sys.r)),
        mu=sys.mu,
        step_source=step.source if step else "none",
        guaranteed_alpha=guaranteed[0],
        guaranteed_ok=guaranteed[1],
        fallback=stats.fallback,
        primal_res=float(np.linalg.norm(rp)),
        dual_res=float(np.linalg.norm(rd)),
        x_min=float(it.x.min()),
        z_min=float(it.z.min()),
        variant_lhs=stats.variant_lhs,
        variant_rhs=stats.variant_rhs,
    )


def _direction(sys, params, mode):
    direction, report, stats = inexact_directions(sys, params.kappa, mode, params.inner)
    return direction, report, stats


def _retry_exact(sys, params, mode, stats):
    direction = exact_directions(sys)
    report = check_conditions(sys, direction, params.kappa, mode)
    return direction, report, replace(stats, fallback=True)


def run_feasible(lp, start, params=None, callback=None):
    """Feasible inexact potential reduction from a strictly feasible ``start``.

    ``start`` is an :class:`Iterate` or an ``(x, y, z)`` triple. ``callback``,
    if given, is called as ``callback(k, sys, direction, report, stats)``
    once per iteration, before the step.
    """
    params = params or SolveParams()
    t0 = time.perf_counter()
    x, y, z = (start.x, start.y, start.z) if isinstance(start, Iterate) else start
    it = Iterate(np.array(x, dtype=np.float64), np.array(y, dtype=np.float64),
                 np.array(z, dtype=np.float64), 0, 1.0)
    n = lp.num_cols
    params.validate(FEASIBLE, n)
    if not (np.all(it.x > 0) and np.all(it.z > 0)):
        raise PreconditionError("start must have x > 0 and z > 0")
    rp, rd = _residual_norms(lp, it)
    if np.linalg.norm(rp) > 1e-9 * (1 + np.linalg.norm(lp.b)) or np.linalg.norm(rd) > 1e-9 * (
        1 + np.linalg.norm(lp.c)
    ):
        raise PreconditionError("start is not feasible: A x = b and A^T y + z = c must hold")
    nu = params.nu_for(n)
    delta = params.delta(FEASIBLE, n)
    phi0 = phi(it.x, it.z, nu).phi
    bound = iteration_bound(phi0, nu, params.epsilon, delta)
    max_outer = params.max_outer if params.max_outer is not None else 10 * max(bound, 1)
    log = []
    status, message = ITERATION_LIMIT, ""
    phi_k = phi0
    while True:
        if it.x @ it.z <= params.epsilon:
            status = OPTIMAL
            break
        if it.k >= max_outer:
            break
        try:
            sys = build_scaled_system(lp, it, nu)
            direction, report, stats = _direction(sys, params, FEASIBLE)
            if callback is not None:
                callback(it.k, sys, direction, report, stats)
            alpha_g = feasible_guaranteed_alpha(sys, params.kappa)
            guaranteed_ok = bool(
                not report.passes
                or _phi_at(it, direction, alpha_g, nu) <= phi_k - delta + DECREASE_SLACK
            )
            try:
                step = step_search_feasible(it, direction, sys, params, delta)
            except NumericalFailure:
                if report.passes:
                    raise
                # direction gated by an alternative rule: redo exactly
                direction, report, stats = _retry_exact(sys, params, FEASIBLE, stats)
                step = step_search_feasible(it, direction, sys, params, delta)
        except (NumericalFailure, DirectionError, DomainError) as exc:
            status, message = NUMERICAL_FAILURE, str(exc)
            break
        rp, rd = _residual_norms(lp, it)
        log.append(_record(it.k, it, sys, direction, report, stats, step, 1.0,
                           (alpha_g, guaranteed_ok), rp, rd, phi_k))
        a = step.alpha
        it = Iterate(it.x + a * direction.dx, it.y + a * direction.dy, it.z + a * direction.dz,
                     it.k + 1, 1.0)
        phi_k = step.phi_after
    return SolveResult(
        status, it, tuple(log), FEASIBLE, nu, params.kappa, params.epsilon, delta, phi0,
        bound, time.perf_counter() - t0, message=message,
    )


def run_infeasible(lp, params=None, callback=None):
    """Infeasible inexact potential reduction from ``rho (e, 0, e)``."""
    params = params or SolveParams()
    t0 = time.perf_counter()
    m, n = lp.A.shape
    params.validate(INFEASIBLE, n)
    rho = float(params.rho)
    it = Iterate(np.full(n, rho), np.zeros(m), np.full(n, rho), 0, 1.0)
    nu = params.nu_for(n)
    delta = params.delta(INFEASIBLE, n)
    rp0, rd0 = _residual_norms(lp, it)
    gap0 = float(it.x @ it.z)
    phi0 = phi(it.x, it.z, nu).phi
    bound = iteration_bound(phi0, nu, params.epsilon, delta)
    max_outer = params.max_outer if params.max_outer is not None else 10 * max(bound, 1)
    log = []
    status, message = ITERATION_LIMIT, ""
    phi_k = phi0
    rp, rd = rp0, rd0
    while True:
        if it.x @ it.z <= params.epsilon:
            status = OPTIMAL
            break
        if it.k >= max_outer:
            break
        try:
            sys = build_scaled_system(lp, it, nu)
            direction, report, stats = _direction(sys, params, INFEASIBLE)
            if callback is not None:
                callback(it.k, sys, direction, report, stats)
            alpha_g = infeasible_guaranteed_alpha(sys, params.kappa)
            guaranteed_ok = bool(
                _phi_at(it, direction, alpha_g, nu) <= phi_k - delta + DECREASE_SLACK
                and gap_condition_holds(it, direction, alpha_g)
            )
            step = step_search_infeasible(it, direction, sys, params, delta)
            if step is None and not report.passes:
                direction, report, stats = _retry_exact(sys, params, INFEASIBLE, stats)
                step = step_search_infeasible(it, direction, sys, params, delta)
        except (NumericalFailure, DirectionError, DomainError) as exc:
            status, message = NUMERICAL_FAILURE, str(exc)
            break
        log.append(_record(it.k, it, sys, direction, report, stats, step, it.theta,
                           (alpha_g, guaranteed_ok), rp, rd, phi_k))
        if step is None:
            status = CERTIFICATE
            message = f"no step size satisfies both step conditions; no optimal pair with ||(x*, z*)||_inf <= {rho:g}"
            break
        a = step.alpha
        it = Iterate(it.x + a * direction.dx, it.y + a * direction.dy, it.z + a * direction.dz,
                     it.k + 1, (1.0 - a) * it.theta)
        phi_k = step.phi_after
        rp, rd = _residual_norms(lp, it)
    return SolveResult(
        status, it, tuple(log), INFEASIBLE, nu, params.kappa, params.epsilon, delta, phi0,
        bound, time.perf_counter() - t0, rho=rho, initial_primal_res=rp0,
        initial_dual_res=rd0, initial_gap=gap0, message=message,
    )


@dataclass(frozen=True)
class VerificationReport:
    checks: dict

    @property
    def passed(self):
        return all(self.checks.values())


def certify_output(result, lp=None, params=None, tol=1e-8):
    """Re-check a finished run against its explicit guarantees.

    Checks: every logged step lowered the potential by at least ``delta``
    (within 1e-10); the iteration count respects the potential-decrease
    bound; in infeasible mode the logged residual norms equal ``theta``
    times the initial ones (within ``tol`` relative) with ``theta`` the
    product of ``1 - alpha``, and on optimal exit the final residuals obey
    ``eps ||initial residuals|| / x0^T z0``. ``lp`` enables the final
    residual recomputation.
    """
    steps = [rec for rec in result.log if rec.step_source != "none"]
    checks = {
        "potential_decrease": all(rec.delta_achieved >= result.delta - DECREASE_SLACK for rec in steps),
        "iteration_bound": result.iterations <= result.iteration_bound,
    }
    if result.mode == INFEASIBLE:
        p0 = float(np.linalg.norm(result.initial_primal_res))
        d0 = float(np.linalg.norm(result.initial_dual_res))
        theta = 1.0
        ok = True
        for rec in result.log:
            ok &= abs(rec.theta - theta) <= 1e-10 * max(theta, 1e-300) + 1e-300
            if p0 > 0:
                ok &= abs(rec.primal_res / p0 - theta) <= tol
            if d0 > 0:
                ok &= abs(rec.dual_res / d0 - theta) <= tol
            if rec.step_source != "none":
                theta *= 1.0 - rec.alpha
        ok &= abs(result.iterate.theta - theta) <= 1e-10 * max(theta, 1e-300) + 1e-300
        checks["theta_consistency"] = bool(ok)
        if result.status == OPTIMAL and lp is not None:
            rp, rd = _residual_norms(lp, result.iterate)
            final = math.hypot(np.linalg.norm(rp), np.linalg.norm(rd))
            limit = result.epsilon * math.hypot(p0, d0) / result.initial_gap
            checks["epsilon_approximation"] = bool(final <= limit * (1 + tol) + 1e-14)
    return VerificationReport(checks)


def write_iteration_log(result, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LOG_COLUMNS)
    for rec in result.log:
        writer.writerow([_fmt(v) for v in rec.csv_row()])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))
