"""Exact ground truth: discrete structural causal models and brute-force oracles.

Everything here exists to check the closed forms elsewhere in the package
against quantities computed a different way: exact counterfactual laws by
enumeration over finite latent supports, population predictor bundles from
observational conditionals, synthetic data generation, a grid-sweep oracle
for the identification bounds, and finite-difference derivatives.

Counterfactuals use a response-function representation: each mechanism owns
one uniform noise variable shared across intervention levels, so mediator
counterfactuals at different exposure levels are comonotone given the
latents, and outcome noise is independent of mediator noise. With empty
latent supports this makes the cross-world independence conditions hold by
construction; adding a mediator-outcome latent breaks them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bounds import effect_bounds, shifted_effects
from .effects import Contrast, EffectTriple, Pair, PredictorBundle
from .errors import MedboundsError
from .glm import Dataset

__all__ = [
    "StructuralModel",
    "CounterfactualLaw",
    "enumerate_counterfactuals",
    "true_effects",
    "observational_theta",
    "sample_dataset",
    "sweep_bounds",
    "mediation_formula_logit",
    "finite_difference_jacobian",
    "logistic_scm",
    "random_scm",
    "random_bundle",
    "demo_cohort_scm",
    "crossworld_demo_scm",
]

_PROB_TOL = 1e-12


class DegenerateLawError(MedboundsError):
    """A conditional or counterfactual probability is exactly 0 or 1."""


@dataclass(frozen=True)
class StructuralModel:
    """Fully discrete causal model over (C, U1, U2, X, M, Y).

    U1 confounds exposure and outcome, U2 mediator and outcome. Probability
    tables are indexed positionally: ``x_probs[c, u1, i]`` is P(X = grid[i]),
    ``m_probs[i, c, u2]`` is P(M=1 | X=grid[i]), and ``y_probs[i, m, c, u1, u2]``
    is P(Y=1). Latent-free models use singleton latent supports.
    """

    covariate_names: tuple[str, ...]
    c_values: np.ndarray  # (nc, k)
    c_probs: np.ndarray  # (nc,)
    u1_probs: np.ndarray  # (n1,)
    u2_probs: np.ndarray  # (n2,)
    x_grid: np.ndarray  # (ng,)
    x_probs: np.ndarray  # (nc, n1, ng)
    m_probs: np.ndarray  # (ng, nc, n2)
    y_probs: np.ndarray  # (ng, 2, nc, n1, n2)

    def __post_init__(self):
        for name in ("c_values", "c_probs", "u1_probs", "u2_probs", "x_grid", "x_probs", "m_probs", "y_probs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        nc, n1, n2, ng = len(self.c_probs), len(self.u1_probs), len(self.u2_probs), len(self.x_grid)
        if min(nc, n1, n2, ng) < 1:
            raise ValueError("all supports must be nonempty")
        if self.c_values.shape != (nc, len(self.covariate_names)):
            raise ValueError("covariate value table does not match names/support")
        for label, probs in (("covariate", self.c_probs), ("u1", self.u1_probs), ("u2", self.u2_probs)):
            if abs(probs.sum() - 1.0) > _PROB_TOL or probs.min() < 0:
                raise ValueError(f"{label} support probabilities must be nonnegative and sum to 1")
        if self.x_probs.shape != (nc, n1, ng):
            raise ValueError("x_probs has wrong shape")
        if np.abs(self.x_probs.sum(axis=-1) - 1.0).max() > _PROB_TOL or self.x_probs.min() < 0:
            raise ValueError("exposure tables must be nonnegative and sum to 1 per (c, u1)")
        if self.m_probs.shape != (ng, nc, n2) or self.y_probs.shape != (ng, 2, nc, n1, n2):
            raise ValueError("mechanism tables have wrong shape")
        for label, t in (("mediator", self.m_probs), ("outcome", self.y_probs)):
            if t.min() < 0.0 or t.max() > 1.0:
                raise ValueError(f"{label} mechanism probabilities must lie in [0, 1]")
        if len(np.unique(self.x_grid)) != ng:
            raise ValueError("exposure grid values must be distinct")

    def grid_index(self, level: float) -> int:
        hits = np.nonzero(np.isclose(self.x_grid, level, rtol=0.0, atol=1e-9))[0]
        if len(hits) != 1:
            raise ValueError(f"exposure level {level} is not on the model grid {self.x_grid.tolist()}")
        return int(hits[0])

    def profile_index(self, profile: Mapping[str, float]) -> int:
        try:
            vec = np.array([float(profile[name]) for name in self.covariate_names])
        except KeyError as exc:
            raise ValueError(f"profile is missing covariate {exc}") from None
        hits = np.nonzero(np.all(np.isclose(self.c_values, vec, rtol=0.0, atol=1e-9), axis=1))[0]
        if len(hits) != 1:
            raise ValueError(f"profile {dict(profile)} is not in the covariate support")
        return int(hits[0])

    def profiles(self) -> list[dict[str, float]]:
        return [
            {name: float(v) for name, v in zip(self.covariate_names, row)}
            for row in self.c_values
        ]

    # -- JSON round trip (documented schema, see README) --------------------

    def to_dict(self) -> dict:
        return {
            "covariates": {"names": list(self.covariate_names), "values": self.c_values.tolist(), "probs": self.c_probs.tolist()},
            "u1_probs": self.u1_probs.tolist(),
            "u2_probs": self.u2_probs.tolist(),
            "exposure_grid": self.x_grid.tolist(),
            "x_probs": self.x_probs.tolist(),
            "m_probs": self.m_probs.tolist(),
            "y_probs": self.y_probs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StructuralModel":
        cov = d["covariates"]
        return cls(
            covariate_names=tuple(cov["names"]),
            c_values=np.asarray(cov["values"], dtype=float),
            c_probs=np.asarray(cov["probs"], dtype=float),
            u1_probs=np.asarray(d["u1_probs"], dtype=float),
            u2_probs=np.asarray(d["u2_probs"], dtype=float),
            x_grid=np.asarray(d["exposure_grid"], dtype=float),
            x_probs=np.asarray(d["x_probs"], dtype=float),
            m_probs=np.asarray(d["m_probs"], dtype=float),
            y_probs=np.asarray(d["y_probs"], dtype=float),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "StructuralModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CounterfactualLaw:
    """Exact cross-world laws for one contrast, all conditioned on its profile.

    ``crossed[(a, b)]`` is P(Y(a, M(b)) = 1) for a, b in {"active",
    "reference"}; ``mediator[b]`` is P(M(b) = 1); ``conditional[(a, m, b,
    m_obs)]`` is P(Y(a, m) = 1 | M(b) = m_obs) and ``marginal[(a, m)]`` its
    unconditional version.
    """

    contrast: Contrast
    crossed: dict
    mediator: dict
    conditional: dict
    marginal: dict

    def single_world(self, level: str) -> float:
        return self.crossed[(level, level)]


def _level_index(scm: StructuralModel, contrast: Contrast, level: str) -> int:
    return scm.grid_index(contrast.active if level == "active" else contrast.reference)


def enumerate_counterfactuals(scm: StructuralModel, contrast: Contrast) -> CounterfactualLaw:
    """Exact counterfactual law by summation over the latent supports."""
    ic = scm.profile_index(contrast.profile)
    levels = {"active": scm.grid_index(contrast.active), "reference": scm.grid_index(contrast.reference)}
    w1 = scm.u1_probs
    w2 = scm.u2_probs

    # P(M(b)=1 | c, u2) and P(Y(a,m)=1 | c, u2) with u1 integrated out
    pm = {b: scm.m_probs[i, ic, :] for b, i in levels.items()}  # (n2,)
    q = {
        (a, m): scm.y_probs[i, m, ic, :, :].T @ w1  # (n2,)
        for a, i in levels.items()
        for m in (0, 1)
    }

    mediator = {b: float(w2 @ pm[b]) for b in levels}

    crossed = {}
    for a in levels:
        for b in levels:
            crossed[(a, b)] = float(w2 @ (pm[b] * q[(a, 1)] + (1.0 - pm[b]) * q[(a, 0)]))

    conditional = {}
    marginal = {}
    for a in levels:
        for m in (0, 1):
            marginal[(a, m)] = float(w2 @ q[(a, m)])
            for b in levels:
                for m_obs in (0, 1):
                    wgt = w2 * (pm[b] if m_obs == 1 else (1.0 - pm[b]))
                    total = wgt.sum()
                    conditional[(a, m, b, m_obs)] = (
                        float(wgt @ q[(a, m)] / total) if total > 0 else float("nan")
                    )
    return CounterfactualLaw(
        contrast=contrast, crossed=crossed, mediator=mediator, conditional=conditional, marginal=marginal
    )


def _logit(p: float, what: str) -> float:
    if not 0.0 < p < 1.0:
        raise DegenerateLawError(f"{what} is degenerate (p={p}); log odds undefined")
    return float(np.log(p / (1.0 - p)))


def true_effects(scm: StructuralModel, contrast: Contrast) -> EffectTriple:
    """Natural effects straight from exact counterfactual probabilities."""
    law = enumerate_counterfactuals(scm, contrast)
    nde = _logit(law.crossed[("active", "reference")], "crossed law") - _logit(
        law.crossed[("reference", "reference")], "reference world"
    )
    nie = _logit(law.crossed[("active", "active")], "active world") - _logit(
        law.crossed[("active", "reference")], "crossed law"
    )
    return EffectTriple.from_parts(nde, nie)


def _observational(scm: StructuralModel, ix: int, ic: int) -> tuple[float, float, float]:
    """P(Y=1|X,M=0,c), P(Y=1|X,M=1,c), P(M=1|X,c) for one exposure index."""
    w1 = scm.u1_probs
    w2 = scm.u2_probs
    px_u1 = scm.x_probs[ic, :, ix]  # (n1,)
    denom_x = float(w1 @ px_u1)
    if denom_x <= 0.0:
        raise DegenerateLawError("conditioning exposure level has probability 0 at this profile")
    w1_post = w1 * px_u1 / denom_x  # P(u1 | X=x, c)
    pm_u2 = scm.m_probs[ix, ic, :]  # (n2,)
    p_m1 = float(w2 @ pm_u2)
    out = []
    for m in (0, 1):
        w_m = pm_u2 if m == 1 else (1.0 - pm_u2)
        denom_m = float(w2 @ w_m)
        if denom_m <= 0.0:
            raise DegenerateLawError(f"observational P(M={m}|X,c) is 0; conditional undefined")
        w2_post = w2 * w_m / denom_m
        out.append(float(w1_post @ scm.y_probs[ix, m, ic, :, :] @ w2_post))
    return out[0], out[1], p_m1


def observational_theta(scm: StructuralModel, contrast: Contrast) -> PredictorBundle:
    """Population predictor bundle (zero covariance) from observational logits."""
    ic = scm.profile_index(contrast.profile)
    ia = scm.grid_index(contrast.active)
    ir = scm.grid_index(contrast.reference)
    y_a0, y_a1, pm_a = _observational(scm, ia, ic)
    y_r0, y_r1, pm_r = _observational(scm, ir, ic)
    values = np.array(
        [
            _logit(y_a0, "P(Y|X=active,M=0)"),
            _logit(y_r0, "P(Y|X=reference,M=0)"),
            _logit(y_a1, "P(Y|X=active,M=1)"),
            _logit(y_r1, "P(Y|X=reference,M=1)"),
            _logit(pm_a, "P(M|X=active)"),
            _logit(pm_r, "P(M|X=reference)"),
        ]
    )
    return PredictorBundle(values=values, cov=np.zeros((6, 6)))


def sample_dataset(scm: StructuralModel, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. rows; identical seed and model give identical bytes."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    ic = rng.choice(len(scm.c_probs), size=n, p=scm.c_probs)
    iu1 = rng.choice(len(scm.u1_probs), size=n, p=scm.u1_probs)
    iu2 = rng.choice(len(scm.u2_probs), size=n, p=scm.u2_probs)
    cdf = np.cumsum(scm.x_probs[ic, iu1, :], axis=1)
    ix = (rng.random(n)[:, None] < cdf).argmax(axis=1)
    m = (rng.random(n) < scm.m_probs[ix, ic, iu2]).astype(float)
    y = (rng.random(n) < scm.y_probs[ix, m.astype(int), ic, iu1, iu2]).astype(float)
    covs = {name: scm.c_values[ic, j] for j, name in enumerate(scm.covariate_names)}
    return Dataset(outcome=y, mediator=m, exposure=scm.x_grid[ix], covariates=covs)


# --------------------------------------------------------------------------
# Brute-force oracles
# --------------------------------------------------------------------------


def sweep_bounds(
    bundle: PredictorBundle,
    lo: float = -30.0,
    hi: float = 30.0,
    points: int = 100_001,
):
    """Grid brute force for the identification bounds.

    Each effect is a fixed combination of per-pair adjustment factors, and
    each factor sweeps its full admissible range as its own shift runs over
    the grid, so taking factor extremes on the grid and recombining them
    recovers the bounds without touching the closed-form algebra. Returns
    an EffectBounds-shaped object.
    """
    if points < 2:
        raise ValueError("points must be at least 2")
    from . import _kernels
    from .bounds import BoundPair, EffectBounds

    b_x0, b_xs0, b_x1, b_xs1, g_x, g_xs = (float(v) for v in bundle.values)
    cross = _kernels.pair_factor_extrema(b_x0, b_x1, g_xs, lo, hi, points)
    active = _kernels.pair_factor_extrema(b_x0, b_x1, g_x, lo, hi, points)
    reference = _kernels.pair_factor_extrema(b_xs0, b_xs1, g_xs, lo, hi, points)

    base = b_x0 - b_xs0
    nde = BoundPair(base + cross[0] - reference[1], base + cross[1] - reference[0])
    nie = BoundPair(active[0] - cross[1], active[1] - cross[0])
    te = BoundPair(nde.lower + nie.lower, nde.upper + nie.upper)
    return EffectBounds(nde=nde, nie=nie, te=te, point=shifted_effects(bundle, 0.0))


def mediation_formula_logit(bundle: PredictorBundle, pair: Pair = Pair.ACTIVE) -> float:
    """Plug-in crossed-world logit: sum_m P(Y=1|x,m) P(M=m|x') then logit.

    Computed on the probability scale, independently of the natural-effect
    model algebra it validates.
    """
    b0, b1 = bundle.outcome_parts(pair)
    g = bundle.mediator_part(pair)
    pm = 1.0 / (1.0 + np.exp(-g))
    p = pm / (1.0 + np.exp(-b1)) + (1.0 - pm) / (1.0 + np.exp(-b0))
    return _logit(float(p), "mediation-formula probability")


def finite_difference_jacobian(bundle: PredictorBundle, h: float = 1e-6) -> np.ndarray:
    """Central-difference 6x4 jacobian of the log bound endpoints."""

    def tau(values: np.ndarray) -> np.ndarray:
        eb = effect_bounds(PredictorBundle(values=values, cov=np.zeros((6, 6))))
        return np.array([eb.nde.lower, eb.nde.upper, eb.nie.lower, eb.nie.upper])

    D = np.zeros((6, 4))
    base = bundle.values
    for i in range(6):
        up = base.copy()
        dn = base.copy()
        up[i] += h
        dn[i] -= h
        D[i, :] = (tau(up) - tau(dn)) / (2.0 * h)
    return D


def random_bundle(rng: np.random.Generator, scale: float = 4.0, with_cov: bool = False) -> PredictorBundle:
    """Random predictor bundle for property checks; optional random PSD cov."""
    values = rng.uniform(-scale, scale, size=6)
    if with_cov:
        a = rng.normal(size=(6, 6)) * 0.2
        cov = a @ a.T
    else:
        cov = np.zeros((6, 6))
    return PredictorBundle(values=values, cov=cov)


# --------------------------------------------------------------------------
# Model builders
# --------------------------------------------------------------------------


def logistic_scm(
    covariate_names: Sequence[str],
    c_values: np.ndarray,
    c_probs: np.ndarray,
    x_grid: np.ndarray,
    x_probs: np.ndarray,
    mediator_coefs: Mapping[str, float],
    outcome_coefs: Mapping[str, float],
) -> StructuralModel:
    """Latent-free model whose mechanisms are logistic in (x, m, covariates).

    Coefficient keys: "1" (intercept), "x", "m" (outcome only), or a
    covariate name. ``x_probs`` is either one shared grid distribution or a
    per-profile (nc, ng) table. Because there are no latents, observational
    conditionals equal the mechanism probabilities exactly.
    """
    c_values = np.asarray(c_values, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    nc, ng = len(c_values), len(x_grid)
    x_probs = np.asarray(x_probs, dtype=float)
    if x_probs.ndim == 1:
        x_probs = np.broadcast_to(x_probs, (nc, ng)).copy()
    x_probs = x_probs.reshape(nc, 1, ng)

    def eta(coefs: Mapping[str, float], xi: float, m: int | None, crow: np.ndarray) -> float:
        total = 0.0
        for key, w in coefs.items():
            if key == "1":
                total += w
            elif key == "x":
                total += w * xi
            elif key == "m":
                if m is None:
                    raise ValueError("mediator coefficients cannot reference 'm'")
                total += w * m
            else:
                total += w * crow[list(covariate_names).index(key)]
        return total

    expit = lambda z: 1.0 / (1.0 + np.exp(-z))
    m_probs = np.empty((ng, nc, 1))
    y_probs = np.empty((ng, 2, nc, 1, 1))
    for i, xi in enumerate(x_grid):
        for c in range(nc):
            m_probs[i, c, 0] = expit(eta(mediator_coefs, xi, None, c_values[c]))
            for m in (0, 1):
                y_probs[i, m, c, 0, 0] = expit(eta(outcome_coefs, xi, m, c_values[c]))
    return StructuralModel(
        covariate_names=tuple(covariate_names),
        c_values=c_values,
        c_probs=np.asarray(c_probs, dtype=float),
        u1_probs=np.array([1.0]),
        u2_probs=np.array([1.0]),
        x_grid=x_grid,
        x_probs=x_probs,
        m_probs=m_probs,
        y_probs=y_probs,
    )


def random_scm(
    rng: np.random.Generator,
    n_c: int = 2,
    n_x: int = 3,
    n_u1: int = 1,
    n_u2: int = 1,
    prob_floor: float = 0.05,
) -> StructuralModel:
    """Random discrete model with mechanism probabilities away from 0/1.

    Defaults have singleton latents, i.e. no unmeasured confounding, which
    is the regime where point identification is exact and the bounds must
    contain the truth.
    """

    def simplex(k: int) -> np.ndarray:
        p = rng.uniform(prob_floor, 1.0, size=k)
        return p / p.sum()

    x_grid = np.sort(rng.choice(np.arange(0.0, 25.0), size=n_x, replace=False))
    x_probs = np.stack(
        [np.stack([simplex(n_x) for _ in range(n_u1)]) for _ in range(n_c)]
    )
    lo, hi = prob_floor, 1.0 - prob_floor
    return StructuralModel(
        covariate_names=("c",),
        c_values=np.arange(n_c, dtype=float).reshape(-1, 1),
        c_probs=simplex(n_c),
        u1_probs=simplex(n_u1),
        u2_probs=simplex(n_u2),
        x_grid=x_grid,
        x_probs=x_probs,
        m_probs=rng.uniform(lo, hi, size=(n_x, n_c, n_u2)),
        y_probs=rng.uniform(lo, hi, size=(n_x, 2, n_c, n_u1, n_u2)),
    )


def demo_cohort_scm() -> StructuralModel:
    """Bundled synthetic smoking cohort: exposure in pack-years, a binary
    pulmonary condition as mediator, a rare binary disease outcome, with BMI
    and gender as covariates.

    Latent-free (the identification conditions hold), mechanisms logistic.
    BMI sits on a 7-point grid with binomial weights matching mean 27.564
    and SD 4.443; gender is 1 with probability 0.725; pack-years follow a
    discretized shifted gamma on a 10..170 grid.
    """
    bmi_mean, bmi_sd = 27.564, 4.443
    h = bmi_sd / np.sqrt(1.5)  # binomial(6, 1/2) has variance 1.5 in step units
    bmi_grid = bmi_mean + (np.arange(7) - 3) * h
    bmi_probs = np.array([1, 6, 15, 20, 15, 6, 1]) / 64.0
    gender_probs = np.array([0.275, 0.725])

    c_values = np.array([[b, g] for b in bmi_grid for g in (0.0, 1.0)])
    c_probs = np.array([pb * pg for pb in bmi_probs for pg in gender_probs])

    x_grid = np.arange(10.0, 171.0, 10.0)
    # shifted gamma matched to mean ~36.9 and SD ~21.5 pack-years
    from scipy.stats import gamma as gamma_dist

    shape = (26.933 / 21.521) ** 2
    scale = 26.933 / shape
    edges = np.concatenate([[-np.inf], x_grid[:-1] + 5.0, [np.inf]])
    cdf = gamma_dist.cdf(edges - 10.0, a=shape, scale=scale)
    x_probs = np.diff(cdf)
    x_probs = x_probs / x_probs.sum()

    return logistic_scm(
        covariate_names=("bmi", "gender"),
        c_values=c_values,
        c_probs=c_probs,
        x_grid=x_grid,
        x_probs=x_probs,
        mediator_coefs={"1": 0.418, "x": 0.017, "bmi": -0.098, "gender": 0.595},
        outcome_coefs={"1": -3.925, "x": 0.020, "m": 1.250, "bmi": -0.064, "gender": 0.587},
    )


def crossworld_demo_scm() -> StructuralModel:
    """Hand-crafted confounded model where the matched cross-world equalities
    hold while the unmatched ones fail.

    Conditioning the counterfactual outcome on the mediator taking the same
    value in either world leaves its law unchanged, yet conditioning on the
    opposite value (or not conditioning) shifts it, so the weaker condition
    is strictly weaker than full cross-world independence. The mediator-
    outcome latent has three support points; the exposure mechanism ignores
    the latents, keeping exposure-mediator confounding absent.
    """
    m_active = np.array([0.2, 0.5, 0.8])
    m_reference = np.array([0.1, 0.4, 0.5])
    # active-level outcome tables orthogonal to both mediator weightings
    y_active_m1 = np.array([0.36, 0.46, 0.56])
    y_active_m0 = np.array([0.43, 0.08, 0.33])
    y_ref_m0 = np.array([0.25, 0.30, 0.35])
    y_ref_m1 = np.array([0.45, 0.50, 0.55])

    m_probs = np.stack([m_reference, m_active])[:, None, :]  # (ng=2, nc=1, n2=3)
    y_probs = np.empty((2, 2, 1, 1, 3))
    y_probs[0, 0, 0, 0, :] = y_ref_m0
    y_probs[0, 1, 0, 0, :] = y_ref_m1
    y_probs[1, 0, 0, 0, :] = y_active_m0
    y_probs[1, 1, 0, 0, :] = y_active_m1
    return StructuralModel(
        covariate_names=("z",),
        c_values=np.array([[0.0]]),
        c_probs=np.array([1.0]),
        u1_probs=np.array([1.0]),
        u2_probs=np.array([1.0, 1.0, 1.0]) / 3.0,
        x_grid=np.array([0.0, 1.0]),
        x_probs=np.full((1, 1, 2), 0.5),
        m_probs=m_probs,
        y_probs=y_probs,
    )
