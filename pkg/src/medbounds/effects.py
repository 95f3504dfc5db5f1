"""Point-identified natural effects on the log odds-ratio scale.

Everything downstream of model fitting is a function of six linear
predictors: the outcome predictor at (active, reference) exposure crossed
with mediator 0/1, and the mediator predictor at both exposure levels.
``PredictorBundle`` carries that 6-vector together with the covariance of
its estimator, in a fixed component order that the delta-method code
indexes against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .glm import FittedGlm, Point, design_row, linear_predictor

__all__ = [
    "Contrast",
    "PredictorBundle",
    "EffectTriple",
    "Pair",
    "predictor_bundle",
    "mediator_posterior_logit",
    "counterfactual_outcome_logit",
    "point_effects",
]


def softplus(z: float) -> float:
    """log(1 + e^z), stable for large |z|."""
    return float(np.logaddexp(0.0, z))


@dataclass(frozen=True)
class Contrast:
    """An exposure shift (reference -> active) at a fixed covariate profile."""

    active: float
    reference: float
    profile: Mapping[str, float]


class Pair(enum.Enum):
    """Which (outcome-level, mediator-level) combination a quantity refers to.

    CROSS pairs the active outcome world with the reference mediator world;
    ACTIVE and REFERENCE are the two single-world cases.
    """

    CROSS = "cross"
    ACTIVE = "active"
    REFERENCE = "reference"


@dataclass(frozen=True)
class PredictorBundle:
    """Six linear predictors and the covariance of their estimator.

    Component order (fixed; the uncertainty module differentiates against it):
    outcome at (active, m=0), (reference, m=0), (active, m=1),
    (reference, m=1), then mediator at active and at reference.
    """

    values: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.cov, dtype=float)
        if v.shape != (6,) or s.shape != (6, 6):
            raise ValueError("bundle needs 6 predictors and a 6x6 covariance")
        if np.abs(s - s.T).max() > 1e-10 * max(1.0, np.abs(s).max()):
            raise ValueError("bundle covariance is not symmetric")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "cov", 0.5 * (s + s.T))

    # readable accessors for the fixed ordering
    @property
    def y_active_m0(self) -> float:
        return float(self.values[0])

    @property
    def y_ref_m0(self) -> float:
        return float(self.values[1])

    @property
    def y_active_m1(self) -> float:
        return float(self.values[2])

    @property
    def y_ref_m1(self) -> float:
        return float(self.values[3])

    @property
    def m_active(self) -> float:
        return float(self.values[4])

    @property
    def m_ref(self) -> float:
        return float(self.values[5])

    def outcome_parts(self, pair: Pair) -> tuple[float, float]:
        """(m=0, m=1) outcome predictors at the pair's outcome level."""
        if pair is Pair.REFERENCE:
            return self.y_ref_m0, self.y_ref_m1
        return self.y_active_m0, self.y_active_m1

    def mediator_part(self, pair: Pair) -> float:
        """Mediator predictor at the pair's mediator level."""
        return self.m_active if pair is Pair.ACTIVE else self.m_ref


@dataclass(frozen=True)
class EffectTriple:
    """Natural direct, indirect and total effects (log odds-ratios).

    Constructed so the total is exactly the sum of the other two.
    """

    nde: float
    nie: float
    te: float

    @classmethod
    def from_parts(cls, nde: float, nie: float) -> "EffectTriple":
        return cls(nde=float(nde), nie=float(nie), te=float(nde) + float(nie))


def predictor_bundle(
    outcome_model: FittedGlm,
    mediator_model: FittedGlm,
    contrast: Contrast,
) -> PredictorBundle:
    """Evaluate both models at the six contrast points and propagate covariance.

    The two coefficient vectors are treated as uncorrelated (separate
    likelihoods), so the bundle covariance is A diag(covY, covM) A' with A
    stacking the six design rows.
    """
    prof = dict(contrast.profile)
    pts_y = [
        Point(contrast.active, 0.0, prof),
        Point(contrast.reference, 0.0, prof),
        Point(contrast.active, 1.0, prof),
        Point(contrast.reference, 1.0, prof),
    ]
    pts_m = [
        Point(contrast.active, None, prof),
        Point(contrast.reference, None, prof),
    ]
    values = np.array(
        [linear_predictor(outcome_model, p) for p in pts_y]
        + [linear_predictor(mediator_model, p) for p in pts_m]
    )
    ky = len(outcome_model.coefficients)
    km = len(mediator_model.coefficients)
    A = np.zeros((6, ky + km))
    for i, p in enumerate(pts_y):
        A[i, :ky] = design_row(outcome_model, p)
    for i, p in enumerate(pts_m):
        A[4 + i, ky:] = design_row(mediator_model, p)
    block = np.zeros((ky + km, ky + km))
    block[:ky, :ky] = outcome_model.covariance
    block[ky:, ky:] = mediator_model.covariance
    cov = A @ block @ A.T
    return PredictorBundle(values=values, cov=cov)


def mediator_posterior_logit(bundle: PredictorBundle, y: int, pair: Pair = Pair.CROSS) -> float:
    """Logit of the mediator being 1 given the outcome took value ``y``.

    This is the retrospective (Bayes-flipped) mediator probability inside the
    chosen pair's counterfactual world; the two single-world pairs reuse the
    same algebra with matched exposure levels.
    """
    if y not in (0, 1):
        raise ValueError("y must be 0 or 1")
    b0, b1 = bundle.outcome_parts(pair)
    g = bundle.mediator_part(pair)
    return y * (b1 - b0) + softplus(b0) - softplus(b1) + g


def counterfactual_outcome_logit(bundle: PredictorBundle, pair: Pair = Pair.CROSS) -> float:
    """Logit of the outcome under the pair's (exposure, mediator-world) setting.

    For the single-world pairs this reduces to the logit of the observational
    outcome probability marginalized over the mediator.
    """
    b0, _ = bundle.outcome_parts(pair)
    g1 = mediator_posterior_logit(bundle, 1, pair)
    g0 = mediator_posterior_logit(bundle, 0, pair)
    return b0 + softplus(g1) - softplus(g0)


def point_effects(bundle: PredictorBundle) -> EffectTriple:
    """Natural effects under the full identification assumption set."""
    nde = counterfactual_outcome_logit(bundle, Pair.CROSS) - counterfactual_outcome_logit(
        bundle, Pair.REFERENCE
    )
    nie = counterfactual_outcome_logit(bundle, Pair.ACTIVE) - counterfactual_outcome_logit(
        bundle, Pair.CROSS
    )
    return EffectTriple.from_parts(nde, nie)
