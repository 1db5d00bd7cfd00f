"""Preconditioned conjugate gradients with a caller-supplied stopping test."""

from dataclasses import dataclass

import numpy as np

ACCEPTED = "accepted"
MAX_ITERATIONS = "max-iterations"
BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class CgOutcome:
    """State of a CG run.

    ``residual`` is ``rhs - apply(solution)``. Between refreshes the
    acceptance test may see the recurrence residual; a returned outcome
    always carries the residual recomputed from the operator, and an
    acceptance only counts if it survives that recomputation. The
    recomputed residual is never fed back into the recurrence, since that
    breaks conjugacy once the true residual stagnates at rounding level.
    """

    solution: np.ndarray
    residual: np.ndarray
    iterations: int
    stop_reason: str | None = None


def conjugate_gradients(apply, rhs, precond=None, accept=None, max_iters=None,
                        check_every=1, refresh_every=50, x0=None):
    """Solve ``apply(y) = rhs`` by preconditioned CG.

    Parameters
    ----------
    apply, precond : callable
        Symmetric positive definite operators on vectors of length ``m``;
        ``precond`` applies the inverse of the preconditioner (identity if
        None).
    accept : callable
        Predicate on a :class:`CgOutcome`, evaluated after every
        ``check_every`` iterations. The run stops at the first acceptance.
        Defaults to ``||s|| <= 1e-12 ||rhs||``.
    max_iters : int
        Iteration cap (default ``5 m``).
    refresh_every : int
        Every ``refresh_every`` iterations the acceptance test is handed an
        explicitly recomputed residual instead of the recurrence one.

    Returns
    -------
    CgOutcome
        ``stop_reason`` is one of ``accepted``, ``max-iterations`` or
        ``breakdown`` (nonpositive curvature or a zero preconditioned inner
        product caused by rounding).
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    m = rhs.shape[0]
    if precond is None:
        precond = _identity
    if max_iters is None:
        max_iters = 5 * m
    rhs_norm = np.linalg.norm(rhs)
    if accept is None:
        def accept(outcome):
            return np.linalg.norm(outcome.residual) <= 1e-12 * rhs_norm

    if x0 is None:
        y = np.zeros(m)
        s = rhs.copy()
    else:
        y = np.array(x0, dtype=np.float64)
        s = rhs - apply(y)

    def outcome(k, residual, reason=None):
        return CgOutcome(y.copy(), residual.copy(), k, reason)

    if accept(outcome(0, s)):
        return outcome(0, s, ACCEPTED)

    t = precond(s)
    p = t.copy()
    st = s @ t
    k = 0
    while k < max_iters:
        if st <= 0.0:
            return _finish(apply, rhs, y, k, BREAKDOWN)
        ap = apply(p)
        curv = p @ ap
        if not curv > 0.0:
            return _finish(apply, rhs, y, k, BREAKDOWN)
        step = st / curv
        y += step * p
        k += 1
        s -= step * ap
        if k % check_every == 0 or k == max_iters:
            explicit = k % refresh_every == 0
            seen = rhs - apply(y) if explicit else s
            if accept(outcome(k, seen)):
                if not explicit:
                    seen = rhs - apply(y)
                if explicit or accept(outcome(k, seen)):
                    return outcome(k, seen, ACCEPTED)
        t = precond(s)
        st_new = s @ t
        p = t + (st_new / st) * p if st > 0.0 else t
        st = st_new
    return _finish(apply, rhs, y, k, MAX_ITERATIONS)


def _finish(apply, rhs, y, k, reason):
    return CgOutcome(y.copy(), rhs - apply(y), k, reason)


def _identity(v):
    return v
