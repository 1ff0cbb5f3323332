"""Levenberg-Marquardt for small dense nonlinear least-squares problems."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateData

LAMBDA_INIT = 1e-3
LAMBDA_FACTOR = 10.0
LAMBDA_MAX = 1e16
XTOL = 1e-10
FTOL = 1e-12
GTOL = 1e-10
MAX_ITER = 100


@dataclass
class LMResult:
    x: np.ndarray
    residuals: np.ndarray
    cost: float
    iterations: int
    converged: bool
    gradient_norm: float
    message: str
    cost_history: list = field(default_factory=list)


def central_difference_jacobian(fun, x, rel_step=1e-6):
    """Plain two-point central differences, ``h = rel_step * max(1, |x_j|)``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((fun(xp) - fun(xm)) / (2.0 * h))
    return np.stack(cols, axis=1)


def scaled_gradient_norm(J, r):
    """``max_j |J_j . r| / |J_j|``: residual component along each unit Jacobian column.

    Invariant to parameter scaling, in the units of the residuals.
    """
    norms = np.linalg.norm(J, axis=0)
    g = J.T @ r
    return float(np.max(np.abs(g) / np.where(norms > 0, norms, 1.0)))


def levenberg_marquardt(
    fun,
    x0,
    jac=None,
    *,
    max_iter=MAX_ITER,
    xtol=XTOL,
    ftol=FTOL,
    gtol=GTOL,
    lam0=LAMBDA_INIT,
    raise_on_cap=True,
):
    """Minimize ``sum(fun(x)**2)`` with Marquardt-scaled damping.

    The damping factor starts at ``lam0`` and is multiplied by ten after a
    rejected step and divided by ten after an accepted one. Only steps that
    strictly lower the cost are accepted, so the cost history never increases.

    Iteration stops when :func:`scaled_gradient_norm` drops below ``gtol``, the step is small relative to
    ``x`` (``xtol``), or the relative cost decrease drops below ``ftol``.

    Raises:
        DegenerateData: when the damped normal equations stay singular or a
            parameter has no influence on the residuals.
        ConvergenceError: when ``max_iter`` is reached (if ``raise_on_cap``).
    """
    if jac is None:
        jac = lambda x: central_difference_jacobian(fun, x)  # noqa: E731
    x = np.array(x0, dtype=float)
    r = np.asarray(fun(x), dtype=float)
    cost = float(r @ r)
    history = [cost]
    lam = lam0
    message = "iteration cap reached"
    converged = False
    g_norm = np.inf
    it = 0

    while it < max_iter:
        J = np.asarray(jac(x), dtype=float)
        g = J.T @ r
        g_norm = scaled_gradient_norm(J, r)
        if g_norm < gtol:
            converged, message = True, "gradient below tolerance"
            break
        it += 1
        A = J.T @ J
        diag = np.diag(A).copy()
        if np.any(diag <= 1e-300):
            raise DegenerateData(f"parameters {np.flatnonzero(diag <= 1e-300).tolist()} do not affect the residuals")

        stalled = False
        while True:
            try:
                delta = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                delta = None
            if delta is not None and np.all(np.isfinite(delta)):
                x_new = x + delta
                r_new = np.asarray(fun(x_new), dtype=float)
                cost_new = float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    break
            lam *= LAMBDA_FACTOR
            if lam > LAMBDA_MAX:
                if delta is None:
                    raise DegenerateData("normal equations are singular even with maximal damping")
                stalled = True
                break
        if stalled:
            # no descent left at machine precision: stationary point
            converged, message = True, "no further decrease possible"
            break

        decrease = cost - cost_new
        step_small = np.linalg.norm(delta) < xtol * (np.linalg.norm(x) + xtol)
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / LAMBDA_FACTOR, 1e-12)
        if step_small:
            converged, message = True, "step below tolerance"
            break
        if decrease <= ftol * cost:
            converged, message = True, "cost decrease below tolerance"
            break

    if converged:
        g_norm = scaled_gradient_norm(np.asarray(jac(x), dtype=float), r)
    result = LMResult(x, r, cost, it, converged, g_norm, message, history)
    if not converged and raise_on_cap:
        raise ConvergenceError(f"Levenberg-Marquardt did not converge in {max_iter} iterations", result)
    return result
