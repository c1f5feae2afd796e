"""Classical fourth-order Runge-Kutta, shared by the reduced and the mode-resolved solvers."""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter


def rk4_step(rhs, t, y, h):
    """One RK4 step of ``y' = rhs(t, y)``; ``rhs`` may be vector valued."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def linear_rk4_coefficients(lam, h):
    """Coefficients of one RK4 step of the scalar ODE ``y' = lam y + f(t)``.

    Since the step is linear in ``y`` and in the three drive samples,
    ``y_next = R y + c0 f(t) + cm f(t + h/2) + c1 f(t + h)``.
    """

    def step(y, f0, fm, f1):
        k1 = lam * y + f0
        k2 = lam * (y + 0.5 * h * k1) + fm
        k3 = lam * (y + 0.5 * h * k2) + fm
        k4 = lam * (y + h * k3) + f1
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return step(1.0, 0, 0, 0), step(0, 1.0, 0, 0), step(0, 0, 1.0, 0), step(0, 0, 0, 1.0)


def integrate_linear_scalar(lam, h, f_start, f_mid, f_end, y0=0j):
    """Run RK4 for ``y' = lam y + f(t)`` over many steps at once.

    ``f_start[k]``, ``f_mid[k]`` and ``f_end[k]`` are the drive at the start
    (right limit), midpoint and end (left limit) of step ``k``.  The steps are
    exactly the ones :func:`rk4_step` would take; the recursion is evaluated
    with a first-order IIR filter.  Returns ``y`` at all ``n + 1`` nodes.
    """
    R, c0, cm, c1 = linear_rk4_coefficients(lam, h)
    b = c0 * np.asarray(f_start) + cm * np.asarray(f_mid) + c1 * np.asarray(f_end)
    b = b.astype(complex)
    b[0] += R * y0
    y = lfilter([1.0], [1.0, -R], b)
    return np.concatenate([[complex(y0)], y])
