import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from inexact_ipm.potential import DomainError, phi, quadratic_coeffs, wbound_gap

SQRT2 = math.sqrt(2.0)
positive = st.floats(0.01, 100.0, allow_nan=False, allow_infinity=False)


def test_phi_at_ones():
    value = phi(np.ones(2), np.ones(2), SQRT2)
    assert value.phi == pytest.approx(SQRT2 * math.log(2.0), abs=1e-12)
    assert value.phi == pytest.approx(0.980258, abs=1e-6)
    assert value.barrier_sum == 0.0 and value.gap == 2.0


def test_phi_centered_equals_lower_bound():
    x = np.array([1.0, 2.0, 4.0])
    z = 3.0 / x
    value = phi(x, z, 2.0)
    assert value.phi == pytest.approx(2.0 * math.log(9.0), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(arrays(float, 5, elements=positive), arrays(float, 5, elements=positive),
       st.floats(0.01, 50.0), st.floats(math.sqrt(5), 20.0))
def test_phi_properties(x, z, t, nu):
    value = phi(x, z, nu)
    n = x.size
    recomputed = (n + nu) * math.log(value.gap) - value.barrier_sum - n * math.log(n)
    assert value.phi == pytest.approx(recomputed, rel=1e-12, abs=1e-12)
    assert value.phi >= nu * math.log(value.gap) - 1e-12 * max(1.0, abs(value.phi))
    shifted = phi(t * x, z, nu).phi
    assert shifted - value.phi == pytest.approx(nu * math.log(t), abs=1e-9)


def test_phi_domain_errors():
    with pytest.raises(DomainError):
        phi(np.array([1.0, 0.0]), np.ones(2), 1.5)
    with pytest.raises(DomainError):
        phi(np.array([1e-200, 1.0]), np.array([1e-200, 1.0]), 1.5)


def test_quadratic_zero_direction():
    q = quadratic_coeffs(np.ones(3), np.ones(3), np.zeros(3), np.zeros(3), 2.0, 0.5, 10.0)
    assert q.g1 == 0.0 and q.g2 == 0.0 and q.valid


def test_quadratic_e1_exact_direction():
    mu = 2.0 / (2.0 + SQRT2)
    r = np.full(2, mu - 1.0)
    q = quadratic_coeffs(np.ones(2), np.ones(2), np.zeros(2), r, SQRT2, 0.5, 0.1)
    closed_form = -(2.0 + SQRT2) / 2.0 * (r @ r)
    assert closed_form == pytest.approx(-0.585786, abs=1e-6)
    assert q.g1 == pytest.approx(closed_form, rel=1e-12)


def test_quadratic_valid_flag():
    x = np.array([1.0, 2.0])
    z = np.array([1.0, 1.0])
    dx = np.array([-1.0, 0.0])
    dz = np.zeros(2)
    assert quadratic_coeffs(x, z, dx, dz, 2.0, 0.5, 0.5).valid
    assert not quadratic_coeffs(x, z, dx, dz, 2.0, 0.5, 0.51).valid
    with pytest.raises(ValueError):
        quadratic_coeffs(x, z, dx, dz, 2.0, 1.0, 0.1)


def test_quadratic_upper_bound_random():
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 20))
        x, z = rng.uniform(0.1, 5.0, n), rng.uniform(0.1, 5.0, n)
        dx, dz = rng.standard_normal(n), rng.standard_normal(n)
        tau = rng.uniform(0.1, 0.9)
        alpha = rng.uniform(0.0, 1.0)
        nu = math.sqrt(n) * rng.uniform(1.0, 3.0)
        q = quadratic_coeffs(x, z, dx, dz, nu, tau, alpha)
        if not q.valid:
            continue
        checked += 1
        moved = phi(x + alpha * dx, z + alpha * dz, nu).phi
        assert moved <= q.upper(phi(x, z, nu).phi) + 1e-10


def test_g1_is_directional_derivative():
    rng = np.random.default_rng(3)
    n = 6
    x, z = rng.uniform(0.5, 2.0, n), rng.uniform(0.5, 2.0, n)
    dx, dz = rng.standard_normal(n), rng.standard_normal(n)
    nu = math.sqrt(n)
    g1 = quadratic_coeffs(x, z, dx, dz, nu, 0.5, 0.0).g1
    base = phi(x, z, nu).phi
    errors = []
    for alpha in (1e-4, 1e-5, 1e-6):
        slope = (phi(x + alpha * dx, z + alpha * dz, nu).phi - base) / alpha
        errors.append(abs(slope - g1))
    # first-order convergence: the error shrinks about tenfold per decade
    assert errors[0] / errors[1] == pytest.approx(10.0, rel=0.2)
    assert errors[1] / errors[2] == pytest.approx(10.0, rel=0.3)
    assert errors[0] <= 100.0 * 1e-4


def test_wbound_examples():
    lhs, rhs = wbound_gap(np.ones(2), SQRT2)
    assert lhs == pytest.approx(1.0, abs=1e-12)
    assert rhs == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-12)
    w = np.array([0.5, 1.0, 3.0])
    for t in (0.1, 7.0):
        a, b = wbound_gap(w, math.sqrt(3.0))
        at, bt = wbound_gap(t * w, math.sqrt(3.0))
        assert at == pytest.approx(a / t, rel=1e-12) and bt == pytest.approx(b / t, rel=1e-12)


def test_wbound_rejects_small_nu():
    with pytest.raises(ValueError):
        wbound_gap(np.ones(4), 1.9)


def test_wbound_random_suite():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        w = rng.uniform(0.0, 10.0, size=n)
        w[w == 0.0] = 10.0
        lhs, rhs = wbound_gap(w, math.sqrt(n))
        assert lhs >= rhs
