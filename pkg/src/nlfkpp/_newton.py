"""Damped Newton iteration shared by the boundary-value solvers."""
from __future__ import annotations

import numpy as np


class NewtonError(RuntimeError):
    """Newton failed; ``history`` lists the residual max-norms seen."""

    def __init__(self, msg, history):
        super().__init__(f"{msg}; residual history {['%.3e' % h for h in history]}")
        self.history = list(history)


def damped_newton(residual, factor, x0, tol=1e-10, max_iter=50, max_halvings=8,
                  xtol=1e-12):
    """Solve ``residual(x) = 0``.

    ``factor(x)`` returns a callable applying the inverse Jacobian at x.  A
    step ``x + s dx`` is accepted when the trial residual max-norm drops by the
    factor ``1 - s/4``, or when the simplified correction at the trial point
    is shorter than ``(1 - s/4) |dx|`` (natural monotonicity); otherwise s is
    halved.
    Iteration also stops once the full step is below ``xtol (1 + |x|)`` in
    max-norm, i.e. when the residual has reached its round-off floor.

    Returns ``(x, iterations, history)``.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = residual(x)
    history = [float(np.max(np.abs(r)))]
    for it in range(max_iter):
        if history[-1] < tol:
            return x, it, history
        solve = factor(x)
        dx = solve(-r)
        if not np.all(np.isfinite(dx)):
            raise NewtonError("non-finite Newton step", history)
        if np.max(np.abs(dx)) <= xtol * (1.0 + np.max(np.abs(x))):
            return x, it, history
        size = float(np.linalg.norm(dx))
        s = 1.0
        for _ in range(max_halvings + 1):
            xt = x + s * dx
            rt = residual(xt)
            if np.all(np.isfinite(rt)):
                nt = float(np.max(np.abs(rt)))
                if nt < tol or nt <= (1.0 - 0.25 * s) * history[-1]:
                    break
                if float(np.linalg.norm(solve(-rt))) <= (1.0 - 0.25 * s) * size:
                    break
            s *= 0.5
        else:
            raise NewtonError("line search failed", history)
        x, r = xt, rt
        history.append(nt)
    if history[-1] < tol:
        return x, max_iter, history
    raise NewtonError("no convergence", history)

