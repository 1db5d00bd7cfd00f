"""Property suites comparing solver internals against the exact-direction oracle.

Each suite is run over seeded instances (or random samples) and counts
passed and failed checks. ``run_suites`` drives the ``validate`` command.
"""

from dataclasses import dataclass, field

import numpy as np

from .ipm import SolveParams, run_feasible
from .linalg import dense_spd_solve
from .lp_core import generate_feasible_instance
from .potential import phi, quadratic_coeffs, wbound_gap
from .scaled_newton import (
    InnerControls,
    block_residuals,
    exact_directions,
    relative_error_report,
    xi_support_ok,
)

SOLVER_SUITES = (
    "lemma1", "eq12", "eq14", "orthogonality", "pythagoras",
    "projection", "xi_support", "structure", "lemma4",
)
SAMPLE_SUITES = ("lemma2", "lemma3")
SUITES = SOLVER_SUITES + SAMPLE_SUITES
KAPPAS = (0.3, 0.6, 0.9)


@dataclass
class SuiteTally:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    worst: float = 0.0
    notes: list = field(default_factory=list)

    def add(self, ok, excess=0.0, note=None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)
        self.worst = max(self.worst, excess)


def projector_apply(sys, v):
    """``P v`` with ``P = D A^T (A D^2 A^T)^{-1} A D`` via the dense solve."""
    AD = sys.lp.A.to_dense() * sys.d
    return AD.T @ dense_spd_solve(AD @ AD.T, AD @ v)


def g1_two_ways(sys, direction):
    """First-order coefficient from the residual form and from the direction.

    Returns ``(-(n+nu)/(w^T w) r^T (r + xi), ((n+nu)/(w^T w) w - W^-1 e)^T (du + dv))``.
    """
    w = sys.w
    scale = (sys.n + sys.nu) / (w @ w)
    from_residual = -scale * (sys.r @ (sys.r + direction.xi))
    from_direction = (scale * w - 1.0 / w) @ (direction.du + direction.dv)
    return float(from_residual), float(from_direction)


def _instance_shape(seed):
    rng = np.random.default_rng(10_000 + seed)
    m = int(rng.integers(2, 7))
    n = int(rng.integers(m + 2, 3 * m + 3))
    return m, n


def _solver_checks(seed, tallies, break_lift, rng):
    m, n = _instance_shape(seed)
    inst = generate_feasible_instance(seed, m, n)
    kappa = KAPPAS[seed % len(KAPPAS)]
    params = SolveParams(kappa=kappa, epsilon=1e-6,
                         inner=InnerControls(break_lift=break_lift))

    def on_iteration(k, sys, direction, report, stats):
        exact = exact_directions(sys)
        if "lemma1" in tallies and report.holds_6b:
            rel = relative_error_report(direction, exact, kappa)
            t = tallies["lemma1"]
            if rel.degenerate:
                t.skipped += 1
            else:
                excess = max(rel.rel_err_du, rel.rel_err_dv) - rel.bound
                t.add(excess <= 1e-8 and rel.du_lower_ok and rel.dv_lower_ok, max(excess, 0.0),
                      f"seed {seed} k {k}: rel errors {rel.rel_err_du:.3e}, {rel.rel_err_dv:.3e}")
        if "eq12" in tallies:
            a, b = g1_two_ways(sys, direction)
            # unscaled form of the same coefficient
            q = quadratic_coeffs(sys.x, sys.z, direction.dx, direction.dz, sys.nu, 0.5, 0.0)
            scale = max(abs(a), abs(b), 1e-300)
            err = max(abs(a - b), abs(a - q.g1)) / scale
            tallies["eq12"].add(err <= 1e-10, err, f"seed {seed} k {k}: {a!r} vs {b!r}")
        if "eq14" in tallies:
            lhs = np.linalg.norm(sys.r)
            rhs = sys.mu * np.sqrt(3.0) / (2.0 * sys.w_min)
            tallies["eq14"].add(lhs >= rhs - 1e-12, max(rhs - lhs, 0.0), f"seed {seed} k {k}")
        if "orthogonality" in tallies:
            nd = np.linalg.norm(direction.du) * np.linalg.norm(direction.dv)
            val = abs(direction.du @ direction.dv)
            tallies["orthogonality"].add(val <= 1e-10 * nd, val / max(nd, 1e-300), f"seed {seed} k {k}")
        if "pythagoras" in tallies:
            lhs = exact.du @ exact.du + exact.dv @ exact.dv
            rr = sys.r @ sys.r
            err = abs(lhs - rr) / rr
            tallies["pythagoras"].add(err <= 1e-10, err, f"seed {seed} k {k}")
        if "projection" in tallies:
            v = rng.standard_normal(sys.n)
            pv = projector_apply(sys, v)
            ppv = projector_apply(sys, pv)
            nv = np.linalg.norm(v)
            idem = np.linalg.norm(ppv - pv) / nv
            contract = max(np.linalg.norm(pv), np.linalg.norm(v - pv)) / nv - 1.0
            tallies["projection"].add(idem <= 1e-8 and contract <= 1e-8, max(idem, contract, 0.0),
                                      f"seed {seed} k {k}")
        if "xi_support" in tallies:
            tallies["xi_support"].add(xi_support_ok(direction, stats.basic), 0.0,
                                      f"seed {seed} k {k}: residual outside the basis")
        if "structure" in tallies:
            primal, dual, third = block_residuals(sys, direction)
            worst = max(primal, dual)
            tallies["structure"].add(worst <= 1e-10 and third <= 1e-12, worst, f"seed {seed} k {k}")

    result = run_feasible(inst.lp, inst.strict_start, params, callback=on_iteration)
    if "lemma4" in tallies:
        for rec in result.log:
            tallies["lemma4"].add(rec.guaranteed_ok, 0.0, f"seed {seed} k {rec.k}")
    return result


def _w_bound_checks(tally, samples, rng):
    for _ in range(samples):
        n = int(rng.integers(2, 51))
        w = rng.uniform(0.0, 10.0, size=n)
        w[w == 0.0] = 1e-3
        lhs, rhs = wbound_gap(w, np.sqrt(n))
        tally.add(lhs >= rhs, max(rhs - lhs, 0.0), f"n {n}: {lhs!r} < {rhs!r}")


def _quadratic_bound_checks(tally, samples, rng):
    for _ in range(samples):
        n = int(rng.integers(2, 30))
        nu = np.sqrt(n) * rng.uniform(1.0, 2.0)
        x = rng.uniform(0.1, 5.0, size=n)
        z = rng.uniform(0.1, 5.0, size=n)
        dx = rng.standard_normal(n)
        dz = rng.standard_normal(n)
        tau = rng.uniform(0.05, 0.95)
        alpha = tau / max(np.abs(dx / x).max(), np.abs(dz / z).max()) * rng.uniform(0.01, 1.0)
        q = quadratic_coeffs(x, z, dx, dz, nu, tau, alpha)
        base = phi(x, z, nu).phi
        moved = phi(x + alpha * dx, z + alpha * dz, nu).phi
        excess = moved - q.upper(base)
        tally.add(q.valid and excess <= 1e-10, max(excess, 0.0), f"n {n}: excess {excess:.3e}")


def run_suites(seeds=100, suites=None, samples=1000, break_lift=False, seed=0):
    """Run the selected suites; returns ``{name: SuiteTally}`` in suite order."""
    chosen = list(SUITES) if not suites else list(suites)
    unknown = [s for s in chosen if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    tallies = {name: SuiteTally() for name in SUITES if name in chosen}
    rng = np.random.default_rng(seed)
    solver = {k: v for k, v in tallies.items() if k in SOLVER_SUITES}
    if solver:
        for s in range(seeds):
            _solver_checks(s, solver, break_lift, rng)
    if "lemma3" in tallies:
        _w_bound_checks(tallies["lemma3"], samples, rng)
    if "lemma2" in tallies:
        _quadratic_bound_checks(tallies["lemma2"], samples, rng)
    return tallies
