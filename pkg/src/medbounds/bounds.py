"""Identification bounds for natural effects under relaxed assumptions.

When outcome-related confounding cannot be ruled out, the conditional
counterfactual outcome logit is only known up to an additive shift. The
shift enters every effect expression through a single monotone factor per
(outcome-level, mediator-level) pair, and that factor is a straight line in
a bounded retrospective probability, which yields closed-form lower/upper
bounds for the direct, indirect and total effects. The point estimates of
the stronger assumption set are recovered exactly at shift zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .effects import EffectTriple, Pair, PredictorBundle, point_effects, softplus
from .errors import DegenerateMediatorError, DegenerateMediatorWarning

__all__ = [
    "BoundPair",
    "EffectBounds",
    "SensitivityCurve",
    "DELTA_EPS",
    "mediator_log_odds_ratio",
    "shifted_posterior_logit",
    "shifted_effects",
    "sensitivity_probability",
    "sensitivity_probability_range",
    "factor_range",
    "effect_bounds",
    "sensitivity_curve",
]

DELTA_EPS = 1e-10  # below this the mediator effect counts as degenerate


def expit(z: float) -> float:
    z = float(z)
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper + 1e-12:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class EffectBounds:
    """Log-scale identification bounds plus the shift-zero point estimates."""

    nde: BoundPair
    nie: BoundPair
    te: BoundPair
    point: EffectTriple


@dataclass(frozen=True)
class SensitivityCurve:
    """Effects and the sensitivity probability traced along a shift grid."""

    shifts: np.ndarray
    nde: np.ndarray
    nie: np.ndarray
    te: np.ndarray
    probabilities: np.ndarray


def mediator_log_odds_ratio(bundle: PredictorBundle, level: str = "active") -> float:
    """Mediator-on-outcome effect (log odds-ratio) at one exposure level.

    The m=1 vs m=0 gap of the outcome predictor; all bound widths scale with
    it, and it is identified regardless of outcome confounding.
    """
    if level == "active":
        delta = bundle.y_active_m1 - bundle.y_active_m0
    elif level == "reference":
        delta = bundle.y_ref_m1 - bundle.y_ref_m0
    else:
        raise ValueError("level must be 'active' or 'reference'")
    if abs(delta) < DELTA_EPS:
        warnings.warn(
            f"mediator effect at {level} level is numerically zero; "
            "the effect decomposition is degenerate",
            DegenerateMediatorWarning,
            stacklevel=2,
        )
    return float(delta)


def shifted_posterior_logit(
    bundle: PredictorBundle, shift: float, y: int, pair: Pair = Pair.CROSS
) -> float:
    """Retrospective mediator logit when the outcome logit carries a shift.

    At shift 0 this equals the unshifted posterior logit exactly; as the
    shift runs to -inf/+inf it saturates at the mediator predictor and at
    the mediator predictor minus the mediator effect, respectively.
    """
    if y not in (0, 1):
        raise ValueError("y must be 0 or 1")
    b0, b1 = bundle.outcome_parts(pair)
    g = bundle.mediator_part(pair)
    return y * (b1 - b0) + softplus(shift + b0) - softplus(shift + b1) + g


def _log_factor(bundle: PredictorBundle, shift: float, pair: Pair) -> float:
    g1 = shifted_posterior_logit(bundle, shift, 1, pair)
    g0 = shifted_posterior_logit(bundle, shift, 0, pair)
    return softplus(g1) - softplus(g0)


def shifted_effects(bundle: PredictorBundle, shift: float) -> EffectTriple:
    """Natural effects when the same shift applies at every exposure level.

    Reduces to ``point_effects`` at shift 0; for any finite shift each
    component stays inside the corresponding identification bound.
    """
    nde = (
        bundle.y_active_m0
        - bundle.y_ref_m0
        + _log_factor(bundle, shift, Pair.CROSS)
        - _log_factor(bundle, shift, Pair.REFERENCE)
    )
    nie = _log_factor(bundle, shift, Pair.ACTIVE) - _log_factor(bundle, shift, Pair.CROSS)
    return EffectTriple.from_parts(nde, nie)


def sensitivity_probability(bundle: PredictorBundle, shift: float) -> float:
    """The bounded retrospective probability indexing the sensitivity analysis.

    P(mediator stays 0 in the reference world | outcome 0 in the cross world);
    monotone in the shift whenever the mediator effect is nonzero.
    """
    return expit(-shifted_posterior_logit(bundle, shift, 0, Pair.CROSS))


def sensitivity_probability_range(bundle: PredictorBundle) -> BoundPair:
    """Open interval the sensitivity probability can range over."""
    delta = mediator_log_odds_ratio(bundle, "active")
    if abs(delta) < DELTA_EPS:
        raise DegenerateMediatorError(
            "mediator effect is numerically zero; the sensitivity probability "
            "range collapses and bounds are not defined"
        )
    g = bundle.m_ref
    at_minus_inf = expit(-g)
    at_plus_inf = expit(delta - g)
    if delta > 0:
        return BoundPair(at_minus_inf, at_plus_inf)
    return BoundPair(at_plus_inf, at_minus_inf)


def _log_factor_range(delta: float, g: float) -> tuple[float, float]:
    # log of the straight-line extremes: l = (1+e^g)/(1+e^{g-delta}),
    # u = (1+e^{g+delta})/(1+e^g); valid for either sign of delta.
    log_l = softplus(g) - softplus(g - delta)
    log_u = softplus(g + delta) - softplus(g)
    return log_l, log_u


def _pair_delta_g(bundle: PredictorBundle, pair: Pair) -> tuple[float, float]:
    b0, b1 = bundle.outcome_parts(pair)
    return b1 - b0, bundle.mediator_part(pair)


def factor_range(bundle: PredictorBundle, pair: Pair = Pair.CROSS) -> BoundPair:
    """Odds-scale range of the mediator adjustment factor for one pair.

    Degenerate mediator effect gives the limit (1, 1) with a warning rather
    than an error: the factor is continuous there.
    """
    delta, g = _pair_delta_g(bundle, pair)
    if abs(delta) < DELTA_EPS:
        warnings.warn(
            "mediator effect is numerically zero; adjustment factor collapses to 1",
            DegenerateMediatorWarning,
            stacklevel=2,
        )
    log_l, log_u = _log_factor_range(delta, g)
    return BoundPair(float(np.exp(log_l)), float(np.exp(log_u)))


def effect_bounds(bundle: PredictorBundle) -> EffectBounds:
    """Closed-form identification bounds for NDE, NIE and TE (log scale).

    Each effect combines per-pair factor extremes: the NDE divides the cross
    pair by the reference pair, the NIE the active pair by the cross pair,
    and the TE bounds add componentwise. The shift-zero point estimates are
    attached and always lie inside.
    """
    d_x = bundle.y_active_m1 - bundle.y_active_m0
    d_xs = bundle.y_ref_m1 - bundle.y_ref_m0
    if min(abs(d_x), abs(d_xs)) < DELTA_EPS:
        warnings.warn(
            "mediator effect is numerically zero at some exposure level; "
            "bounds collapse to their continuous limits",
            DegenerateMediatorWarning,
            stacklevel=2,
        )
    g_x, g_xs = bundle.m_active, bundle.m_ref

    cross_l, cross_u = _log_factor_range(d_x, g_xs)
    active_l, active_u = _log_factor_range(d_x, g_x)
    ref_l, ref_u = _log_factor_range(d_xs, g_xs)

    base = bundle.y_active_m0 - bundle.y_ref_m0
    nde = BoundPair(base + cross_l - ref_u, base + cross_u - ref_l)
    nie = BoundPair(active_l - cross_u, active_u - cross_l)
    te = BoundPair(nde.lower + nie.lower, nde.upper + nie.upper)
    return EffectBounds(nde=nde, nie=nie, te=te, point=point_effects(bundle))


def sensitivity_curve(bundle: PredictorBundle, shifts) -> SensitivityCurve:
    """Trace shared-shift effects and the sensitivity probability on a grid."""
    from . import _kernels

    shifts = np.asarray(shifts, dtype=float)
    nde, nie = _kernels.effects_trace(bundle.values, shifts)
    probs = np.array([sensitivity_probability(bundle, s) for s in shifts])
    return SensitivityCurve(shifts=shifts, nde=nde, nie=nie, te=nde + nie, probabilities=probs)
