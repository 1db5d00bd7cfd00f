import math

import numpy as np
import pytest

from inexact_ipm.ipm import SolveParams, run_feasible
from inexact_ipm.lp_core import generate_feasible_instance
from inexact_ipm.potential import DomainError
from inexact_ipm.scaled_newton import (
    FEASIBLE,
    INFEASIBLE,
    Direction,
    InnerControls,
    alt_condition_gondzio,
    alt_condition_monteiro,
    block_residuals,
    build_scaled_system,
    check_conditions,
    exact_directions,
    inexact_directions,
    relative_error_report,
    solve_with_residual,
    unscaled_residual,
    xi_support_ok,
)

from conftest import SQRT2, point


@pytest.fixture
def generated():
    inst = generate_feasible_instance(4, 6, 15)
    x, y, z = inst.strict_start
    return inst.lp, point(x, y, z)


class TestBuild:
    def test_e1(self, e1):
        lp, it = e1
        sys = build_scaled_system(lp, it, SQRT2)
        mu = 2.0 / (2.0 + SQRT2)
        assert sys.mu == pytest.approx(0.585786, abs=1e-6)
        assert np.array_equal(sys.p, [0.0]) and np.array_equal(sys.q, [0.0, 0.0])
        assert sys.r == pytest.approx([mu - 1.0] * 2, abs=1e-15)
        assert sys.r[0] == pytest.approx(-0.414214, abs=1e-6)

    def test_definitions(self, generated):
        lp, it = generated
        sys = build_scaled_system(lp, it, 3.0)
        assert np.allclose(sys.d, np.sqrt(it.x / it.z), rtol=1e-14)
        assert np.allclose(sys.w, np.sqrt(it.x * it.z), rtol=1e-14)
        assert sys.w_min == sys.w.min() > 0
        assert np.linalg.norm(sys.p) <= 1e-12 * (1 + np.linalg.norm(lp.b))
        assert np.linalg.norm(sys.q) <= 1e-12 * (1 + np.linalg.norm(lp.c))
        r = -sys.w + sys.mu / sys.w
        assert np.allclose(sys.r, r, rtol=1e-12)

    def test_domain_error(self, e1):
        lp, _ = e1
        with pytest.raises(DomainError):
            build_scaled_system(lp, point([1, 0], [0], [1, 1]), SQRT2)


class TestExact:
    def test_e1(self, e1):
        sys = build_scaled_system(*e1, SQRT2)
        d = exact_directions(sys)
        assert np.allclose(d.du, 0.0, atol=1e-15)
        assert np.allclose(d.dv, sys.r, atol=1e-15)
        assert d.dy == pytest.approx([0.414214], abs=1e-6)
        assert d.basic_support.size == 0

    def test_e2(self, e2):
        sys = build_scaled_system(*e2, SQRT2)
        assert sys.mu == pytest.approx(0.878680, abs=1e-6)
        assert sys.r == pytest.approx([-0.121320, -0.792893], abs=1e-6)
        d = exact_directions(sys)
        # published hand values carry rounding slips in the fifth digit
        assert d.dy == pytest.approx([0.454646], abs=1e-4)
        assert d.dv == pytest.approx([-0.454646, -0.321484], abs=1e-4)
        assert d.du == pytest.approx([0.333326, -0.471409], abs=1e-4)
        # independent closed form: AD^2A^T = 1.5, dy = -(A D r) / 1.5
        dv_ref = -sys.d * (-(sys.d @ sys.r) / 1.5)
        assert d.dv == pytest.approx(dv_ref, rel=1e-12)
        assert abs(sys.d @ d.du) <= 1e-14

    def test_zero_rhs_gives_zero(self, e1):
        lp, it = e1
        sys = build_scaled_system(lp, it, 0.0)  # nu = 0 makes r = 0 at a centred point
        d = exact_directions(sys)
        assert not np.any(d.du) and not np.any(d.dv) and not np.any(d.dy)

    def test_invariants(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d = exact_directions(sys)
        primal, dual, third = block_residuals(sys, d)
        assert primal <= 1e-10 and dual <= 1e-10 and third <= 1e-12
        assert np.allclose(d.dx, sys.d * d.du, rtol=1e-14)
        assert np.allclose(d.dz, d.dv / sys.d, rtol=1e-14)
        assert np.allclose(d.du @ d.du + d.dv @ d.dv, sys.r @ sys.r, rtol=1e-10)


class TestConditions:
    def test_zero_residual_passes(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        for kappa in (0.0, 0.5):
            rep = check_conditions(sys, exact_directions(sys), kappa, INFEASIBLE)
            assert rep.holds_6a and rep.holds_6b and rep.holds_6c and rep.passes

    def test_e1_null_space_residual(self, e1):
        sys = build_scaled_system(*e1, SQRT2)
        d = solve_with_residual(sys, np.array([0.1, -0.1]))
        assert d.du == pytest.approx([0.1, -0.1], abs=1e-14)
        assert d.dv == pytest.approx(sys.r, abs=1e-14)
        for kappa in (0.0, 0.5, 0.99):
            rep = check_conditions(sys, d, kappa)
            assert rep.holds_6a
            assert rep.lhs_6b == pytest.approx(0.141421, abs=1e-6)
            assert not rep.holds_6b

    def test_minus_r_fails_alignment_condition(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d = solve_with_residual(sys, -sys.r)
        for kappa in (0.0, 0.5, 0.99):
            assert not check_conditions(sys, d, kappa).holds_6a

    def test_gap_condition_gates_only_infeasible_mode(self, e1):
        sys = build_scaled_system(*e1, SQRT2)
        # xi = t w with large du, dv so only the gap condition can fail
        xi = -0.9 * sys.w
        d = Direction(np.full(2, 100.0), np.zeros(1), np.full(2, 100.0), np.zeros(2), np.zeros(2),
                      xi, np.arange(2))
        feas = check_conditions(sys, d, 0.5, FEASIBLE)
        infeas = check_conditions(sys, d, 0.5, INFEASIBLE)
        assert not feas.holds_6c and feas.holds_6b
        assert feas.passes == (feas.holds_6a and feas.holds_6b)
        assert not infeas.passes

    def test_degenerate_floor(self, e1):
        sys = build_scaled_system(*e1, SQRT2)
        zeros = np.zeros(2)
        d = Direction(zeros, np.zeros(1), zeros, zeros, zeros, np.full(2, 1e-13), np.arange(2))
        assert check_conditions(sys, d, 0.5).rhs_6b == 1e-12

    def test_unscaled_residual(self, e2):
        sys = build_scaled_system(*e2, SQRT2)
        xi = np.array([0.2, 0.0])
        assert unscaled_residual(sys, solve_with_residual(sys, xi)) == pytest.approx(sys.w * xi)


class TestAlternatives:
    def test_monteiro(self):
        assert alt_condition_monteiro(np.zeros(3), 0.5, 0.5, 4, 4.0).holds
        res = alt_condition_monteiro(np.array([0.03]), 0.5, 0.5, 4, 4.0)
        assert res.rhs == pytest.approx(0.03125) and res.holds
        assert not alt_condition_monteiro(np.array([0.04]), 0.5, 0.5, 4, 4.0).holds

    def test_monteiro_shrinks_with_n(self):
        xi = np.array([0.01])
        thresholds = [alt_condition_monteiro(xi, 0.5, 0.5, n, float(n)).rhs for n in (10, 40, 160, 640)]
        assert np.allclose(np.array(thresholds) * np.sqrt([10, 40, 160, 640]), thresholds[0] * np.sqrt(10))
        assert not alt_condition_monteiro(xi, 0.5, 0.5, 640, 640.0).holds

    def test_gondzio(self):
        assert alt_condition_gondzio(np.ones(2), np.zeros(2), 0.5, 2, 4.0).holds
        res = alt_condition_gondzio(np.array([1.0, 2.0]), np.array([0.1, 0.2]), 0.5, 2, 4.0)
        assert res.lhs == pytest.approx(0.4) and res.rhs == pytest.approx(1.0) and res.holds
        outlier = np.array([0.0, 1.1 * 0.5 * 4.0 / 2])
        assert not alt_condition_gondzio(np.ones(2), outlier, 0.5, 2, 4.0).holds


class TestInexact:
    def test_kappa_zero_is_exact(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d, rep, stats = inexact_directions(sys, 0.0)
        exact = exact_directions(sys)
        assert rep.passes
        assert np.linalg.norm(d.xi) <= 1e-12
        assert np.allclose(d.du, exact.du, atol=1e-8) and np.allclose(d.dv, exact.dv, atol=1e-8)

    def test_full_convergence_matches_exact(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d, _, stats = inexact_directions(sys, 1e-9, inner=InnerControls(max_iters=500))
        exact = exact_directions(sys)
        assert np.linalg.norm(d.du - exact.du) <= 1e-8 * max(1.0, np.linalg.norm(exact.du))
        assert np.linalg.norm(d.dv - exact.dv) <= 1e-8 * max(1.0, np.linalg.norm(exact.dv))

    def test_e2_large_kappa(self, e2):
        sys = build_scaled_system(*e2, SQRT2)
        d, rep, _ = inexact_directions(sys, 0.9)
        assert rep.passes
        rel = relative_error_report(d, exact_directions(sys), 0.9)
        assert rel.bound == pytest.approx(9.0)
        assert rel.rel_err_du <= 9.0 + 1e-8 and rel.rel_err_dv <= 9.0 + 1e-8

    @pytest.mark.parametrize("kappa", [0.3, 0.6, 0.9])
    @pytest.mark.parametrize("preconditioner", ["diagonal", "basis"])
    def test_contract(self, generated, kappa, preconditioner):
        sys = build_scaled_system(*generated, 4.0)
        d, rep, stats = inexact_directions(sys, kappa, inner=InnerControls(preconditioner=preconditioner))
        assert rep.passes
        primal, dual, third = block_residuals(sys, d)
        assert primal <= 1e-10 and dual <= 1e-10 and third <= 1e-12
        assert xi_support_ok(d, stats.basic)
        assert abs(d.du @ d.dv) <= 1e-10 * np.linalg.norm(d.du) * np.linalg.norm(d.dv)
        rel = relative_error_report(d, exact_directions(sys), kappa)
        assert rel.rel_err_du <= kappa / (1 - kappa) + 1e-8
        assert rel.rel_err_dv <= kappa / (1 - kappa) + 1e-8
        assert rel.du_lower_ok and rel.dv_lower_ok

    def test_cap_falls_back_to_exact(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d, rep, stats = inexact_directions(sys, 0.0, inner=InnerControls(max_iters=1))
        assert stats.fallback and rep.passes
        assert not np.any(d.xi)

    def test_variant_rule_reported(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        _, _, stats = inexact_directions(sys, 0.5, inner=InnerControls(condition="monteiro"))
        assert stats.variant_lhs <= stats.variant_rhs

    def test_bad_kappa(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        with pytest.raises(ValueError):
            inexact_directions(sys, 1.0)

    def test_break_lift_moves_residual(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        d, _, stats = inexact_directions(sys, 0.5, inner=InnerControls(break_lift=True))
        assert not xi_support_ok(d, stats.basic)


class TestRelativeError:
    def test_zero_residual(self, generated):
        sys = build_scaled_system(*generated, 4.0)
        exact = exact_directions(sys)
        rel = relative_error_report(exact, exact, 0.5)
        assert rel.rel_err_du == 0.0 and rel.rel_err_dv == 0.0 and rel.bound == 1.0

    def test_e1_degenerate(self, e1):
        sys = build_scaled_system(*e1, SQRT2)
        exact = exact_directions(sys)
        rel = relative_error_report(exact, exact, 0.5)
        assert rel.degenerate and math.isnan(rel.rel_err_du) and rel.within_bound


def test_solver_directions_along_a_run():
    inst = generate_feasible_instance(8, 5, 14)
    seen = []

    def check(k, sys, d, rep, stats):
        assert abs(d.du @ d.dv) <= 1e-10 * np.linalg.norm(d.du) * np.linalg.norm(d.dv) + 1e-300
        assert xi_support_ok(d, stats.basic)
        assert np.linalg.norm(sys.r) >= sys.mu * math.sqrt(3) / (2 * sys.w_min) - 1e-12
        seen.append(k)

    result = run_feasible(inst.lp, inst.strict_start, SolveParams(kappa=0.6, epsilon=1e-6), callback=check)
    assert result.status == "optimal" and len(seen) == result.iterations
