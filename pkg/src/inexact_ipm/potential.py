"""Tanabe-Todd-Ye potential and the bounds used by the step-size analysis."""

from dataclasses import dataclass

import numpy as np

PRODUCT_FLOOR = 1e-300


class DomainError(ValueError):
    """A point left the interior of the positive orthant."""


@dataclass(frozen=True)
class PotentialValue:
    phi: float
    gap: float
    barrier_sum: float
    nu: float

    def __float__(self):
        return self.phi


@dataclass(frozen=True)
class QuadraticBound:
    """Coefficients of ``phi(x + a dx, z + a dz) <= phi(x, z) + g1 a + g2 a^2``.

    ``valid`` records whether the step ``alpha`` satisfies the hypothesis
    ``||alpha X^-1 dx||_inf <= tau`` and ``||alpha Z^-1 dz||_inf <= tau``.
    """

    g1: float
    g2: float
    tau: float
    alpha: float
    valid: bool

    def upper(self, phi0):
        return phi0 + self.g1 * self.alpha + self.g2 * self.alpha ** 2


def _products(x, z):
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError("x and z must have the same length")
    if not (np.all(x > 0) and np.all(z > 0)):
        raise DomainError("x and z must be strictly positive")
    xz = x * z
    if np.any(xz < PRODUCT_FLOOR):
        raise DomainError("complementarity product underflow")
    return x, z, xz


def phi(x, z, nu):
    """``(n + nu) ln(x^T z) - sum_i ln(x_i z_i) - n ln n``."""
    x, z, xz = _products(x, z)
    n = x.shape[0]
    gap = float(np.sum(xz))
    barrier = float(np.sum(np.log(xz)))
    value = (n + nu) * np.log(gap) - barrier - n * np.log(n)
    return PotentialValue(float(value), gap, barrier, float(nu))


def quadratic_coeffs(x, z, dx, dz, nu, tau, alpha):
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    x, z, xz = _products(x, z)
    dx = np.asarray(dx, dtype=np.float64)
    dz = np.asarray(dz, dtype=np.float64)
    n = x.shape[0]
    gap = xz.sum()
    g1 = ((n + nu) / gap - 1.0 / xz) @ (z * dx + x * dz)
    rx = dx / x
    rz = dz / z
    g2 = (n + nu) * (dx @ dz) / gap + (rx @ rx + rz @ rz) / (2.0 * (1.0 - tau))
    valid = bool(
        alpha * np.abs(rx).max(initial=0.0) <= tau
        and alpha * np.abs(rz).max(initial=0.0) <= tau
    )
    return QuadraticBound(float(g1), float(g2), tau, alpha, valid)


def wbound_gap(w, nu):
    """Both sides of ``||W^-1 e - (n+nu)/(w^T w) w|| >= sqrt(3) / (2 w_min)``."""
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    if nu < np.sqrt(n):
        raise ValueError(f"nu = {nu} is below sqrt(n) = {np.sqrt(n)}")
    if np.any(w <= 0):
        raise DomainError("w must be strictly positive")
    lhs = np.linalg.norm(1.0 / w - (n + nu) / (w @ w) * w)
    rhs = np.sqrt(3.0) / (2.0 * w.min())
    return float(lhs), float(rhs)
