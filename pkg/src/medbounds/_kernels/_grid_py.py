"""Pure-numpy implementations of the grid-sweep kernels.

Same call signatures as the compiled module ``_grid``; which one is active
is decided in ``medbounds._kernels``.
"""

import numpy as np


def pair_factor_extrema(b0, b1, g, lo, hi, n):
    """Min/max over a shift grid of the log mediator-adjustment factor.

    The factor is log[(1 + e^{t1}) / (1 + e^{t0})] where
    t0 = log(1+e^{s+b0}) - log(1+e^{s+b1}) + g and t1 = t0 + (b1 - b0),
    evaluated at n equally spaced shifts s in [lo, hi].
    """
    s = np.linspace(lo, hi, n)
    t0 = np.logaddexp(0.0, s + b0) - np.logaddexp(0.0, s + b1) + g
    f = np.logaddexp(0.0, t0 + (b1 - b0)) - np.logaddexp(0.0, t0)
    return float(f.min()), float(f.max())


def effects_trace(theta, shifts):
    """Direct/indirect log odds-ratio effects along a shared shift grid.

    ``theta`` holds the six linear predictors in the fixed bundle order;
    returns (nde, nie) arrays aligned with ``shifts``.
    """
    b_x0, b_xs0, b_x1, b_xs1, g_x, g_xs = (float(v) for v in theta)
    s = np.asarray(shifts, dtype=float)

    h_x = np.logaddexp(0.0, s + b_x0) - np.logaddexp(0.0, s + b_x1)
    h_xs = np.logaddexp(0.0, s + b_xs0) - np.logaddexp(0.0, s + b_xs1)

    def factor(t0, delta):
        return np.logaddexp(0.0, t0 + delta) - np.logaddexp(0.0, t0)

    cross = factor(h_x + g_xs, b_x1 - b_x0)
    active = factor(h_x + g_x, b_x1 - b_x0)
    reference = factor(h_xs + g_xs, b_xs1 - b_xs0)

    nde = (b_x0 - b_xs0) + cross - reference
    nie = active - cross
    return nde, nie
