"""Delta-method uncertainty intervals around estimated identification bounds.

The four log bound endpoints (NDE lower/upper, NIE lower/upper) are smooth
functions of the six-predictor bundle, so their covariance is J' S J with J
the 6x4 jacobian below and S the bundle covariance. Total-effect endpoint
variances add the corresponding NDE/NIE variances plus twice their
covariance. Intervals widen each estimated bound outward by a normal
quantile times its standard error, which targets the whole identification
region rather than a point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .bounds import BoundPair, EffectBounds, effect_bounds
from .effects import PredictorBundle

__all__ = [
    "BoundEstimates",
    "UncertaintyIntervals",
    "normal_quantile",
    "bounds_jacobian",
    "bound_covariance",
    "total_effect_variances",
    "uncertainty_intervals",
]


def normal_quantile(p: float) -> float:
    """Standard normal quantile (inverse CDF), accurate to ~1e-15."""
    if not 0.0 < p < 1.0:
        raise ValueError("quantile argument must be in (0, 1)")
    return float(ndtri(p))


def _expit(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


def bounds_jacobian(bundle: PredictorBundle) -> np.ndarray:
    """6x4 jacobian of the log bound endpoints w.r.t. the predictor bundle.

    Columns are (NDE lower, NDE upper, NIE lower, NIE upper); rows follow the
    bundle component order. The mediator-at-active-level row is structurally
    zero in both NDE columns.
    """
    d_x = bundle.y_active_m1 - bundle.y_active_m0
    d_xs = bundle.y_ref_m1 - bundle.y_ref_m0
    g_x, g_xs = bundle.m_active, bundle.m_ref
    e = _expit

    D = np.zeros((6, 4))
    # NDE lower: base + [sp(g_xs) - sp(g_xs - d_x)] - [sp(g_xs + d_xs) - sp(g_xs)]
    D[:, 0] = (
        1.0 - e(g_xs - d_x),
        e(g_xs + d_xs) - 1.0,
        e(g_xs - d_x),
        -e(g_xs + d_xs),
        0.0,
        2.0 * e(g_xs) - e(g_xs - d_x) - e(g_xs + d_xs),
    )
    # NDE upper
    D[:, 1] = (
        1.0 - e(g_xs + d_x),
        e(g_xs - d_xs) - 1.0,
        e(g_xs + d_x),
        -e(g_xs - d_xs),
        0.0,
        e(g_xs + d_x) + e(g_xs - d_xs) - 2.0 * e(g_xs),
    )
    # NIE lower: [sp(g_x) - sp(g_x - d_x)] - [sp(g_xs + d_x) - sp(g_xs)]
    D[:, 2] = (
        e(g_xs + d_x) - e(g_x - d_x),
        0.0,
        e(g_x - d_x) - e(g_xs + d_x),
        0.0,
        e(g_x) - e(g_x - d_x),
        e(g_xs) - e(g_xs + d_x),
    )
    # NIE upper
    D[:, 3] = (
        e(g_xs - d_x) - e(g_x + d_x),
        0.0,
        e(g_x + d_x) - e(g_xs - d_x),
        0.0,
        e(g_x + d_x) - e(g_x),
        e(g_xs - d_x) - e(g_xs),
    )
    return D


@dataclass(frozen=True)
class BoundEstimates:
    """Estimated log bound endpoints and their delta-method covariance.

    ``log_bounds`` = (NDE lower, NDE upper, NIE lower, NIE upper);
    ``cov`` is the matching 4x4 covariance.
    """

    log_bounds: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        lb = np.asarray(self.log_bounds, dtype=float)
        c = np.asarray(self.cov, dtype=float)
        if lb.shape != (4,) or c.shape != (4, 4):
            raise ValueError("expected 4 log bounds and a 4x4 covariance")
        if not np.all(np.isfinite(lb)):
            raise ValueError("log bounds must be finite")
        if np.abs(c - c.T).max() > 1e-10 * max(1.0, np.abs(c).max()):
            raise ValueError("covariance is not symmetric")
        object.__setattr__(self, "log_bounds", lb)
        object.__setattr__(self, "cov", 0.5 * (c + c.T))

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


def bound_covariance(bundle: PredictorBundle) -> BoundEstimates:
    """Log bound endpoints with their delta-method covariance J' S J."""
    eig_min = float(np.linalg.eigvalsh(bundle.cov).min())
    if eig_min < -1e-8 * max(1.0, float(np.abs(bundle.cov).max())):
        raise ValueError(f"bundle covariance is not positive semidefinite (min eig {eig_min:.3e})")
    eb = effect_bounds(bundle)
    tau = np.array([eb.nde.lower, eb.nde.upper, eb.nie.lower, eb.nie.upper])
    D = bounds_jacobian(bundle)
    v0 = D.T @ bundle.cov @ D
    return BoundEstimates(log_bounds=tau, cov=0.5 * (v0 + v0.T))


def total_effect_variances(estimates: BoundEstimates) -> tuple[float, float]:
    """Variances of the total-effect log bound endpoints (lower, upper)."""
    v = estimates.cov
    var_lo = float(v[0, 0] + v[2, 2] + 2.0 * v[0, 2])
    var_hi = float(v[1, 1] + v[3, 3] + 2.0 * v[1, 3])
    clipped = []
    for name, val in (("lower", var_lo), ("upper", var_hi)):
        if val < 0.0:
            warnings.warn(f"negative computed variance for TE {name} bound; clipping to 0")
            val = 0.0
        clipped.append(val)
    return clipped[0], clipped[1]


@dataclass(frozen=True)
class UncertaintyIntervals:
    """(1 - alpha) point-wise intervals enclosing the identification bounds."""

    alpha: float
    nde: BoundPair
    nie: BoundPair
    te: BoundPair


def uncertainty_intervals(
    bounds: EffectBounds, estimates: BoundEstimates, alpha: float = 0.05
) -> UncertaintyIntervals:
    """Widen each estimated bound outward by z_{alpha/2} standard errors."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    z = normal_quantile(1.0 - alpha / 2.0)
    se = estimates.stderr
    var_te_lo, var_te_hi = total_effect_variances(estimates)
    nde = BoundPair(bounds.nde.lower - z * se[0], bounds.nde.upper + z * se[1])
    nie = BoundPair(bounds.nie.lower - z * se[2], bounds.nie.upper + z * se[3])
    te = BoundPair(
        bounds.te.lower - z * np.sqrt(var_te_lo),
        bounds.te.upper + z * np.sqrt(var_te_hi),
    )
    return UncertaintyIntervals(alpha=alpha, nde=nde, nie=nie, te=te)
