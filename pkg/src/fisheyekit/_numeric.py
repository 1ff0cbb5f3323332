"""Small numeric helpers shared by the model implementations."""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 60


def invert_increasing(fn, dfn, target, lo, hi, x0, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """Solve ``fn(x) = target`` elementwise for a strictly increasing ``fn``.

    Newton iterations are safeguarded by a shrinking bracket ``[lo, hi]``: any
    step that leaves the bracket, is not finite, or fails to halve the previous
    step is replaced by bisection.
    Iteration stops once every update is below ``tol``.

    Args:
        fn: Vectorized increasing function.
        dfn: Its derivative.
        target: Values to invert, any shape.
        lo, hi: Bracket bounds, broadcastable to ``target``.
        x0: Initial guess, broadcastable to ``target``.

    Raises:
        ConvergenceError: if ``max_iter`` iterations do not reach ``tol``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.array(np.broadcast_to(lo, target.shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, target.shape), dtype=float)
    x = np.clip(np.broadcast_to(x0, target.shape).astype(float), lo, hi)
    last_step = hi - lo

    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            fx = fn(x) - target
            above = fx > 0
            hi = np.where(above, x, hi)
            lo = np.where(above, lo, x)
            step = fx / dfn(x)
            xn = np.where(fx == 0, x, x - step)
            slow = np.abs(xn - x) > 0.5 * last_step
            bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi) | slow
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            delta = np.abs(xn - x)
            last_step = np.where(delta > 0, delta, last_step)
            x = xn
            if np.all(delta < tol):
                return x
    raise ConvergenceError(f"radial inversion did not converge in {max_iter} iterations")


def polyval_increasing(coeffs, powers, x):
    """Evaluate ``sum(c * x**p)`` for matching coefficient and power sequences."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c, p in zip(coeffs, powers):
        out = out + c * x**p
    return out


def polyder_increasing(coeffs, powers, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c, p in zip(coeffs, powers):
        if p:
            out = out + c * p * x ** (p - 1)
    return out
