import numpy as np
import pytest

from medbounds import Contrast, PredictorBundle

# Bundle evaluated from the demo-cohort coefficient tables at the
# reference contrast used throughout the tests: active 50 vs reference 10
# pack-years, male, BMI 28.5. Components verified against hand arithmetic.
DERIVED_THETA = np.array([-4.162, -4.962, -2.912, -3.712, -0.930, -1.610])

MEDIATOR_COEFS = {"1": 0.418, "x": 0.017, "bmi": -0.098, "gender": 0.595}
OUTCOME_COEFS = {"1": -3.925, "x": 0.020, "m": 1.250, "bmi": -0.064, "gender": 0.587}

MALE_PROFILE = {"bmi": 28.5, "gender": 1.0}


@pytest.fixture
def derived_bundle() -> PredictorBundle:
    return PredictorBundle(values=DERIVED_THETA.copy(), cov=np.zeros((6, 6)))


@pytest.fixture
def derived_contrast() -> Contrast:
    return Contrast(active=50.0, reference=10.0, profile=MALE_PROFILE)


def random_bundles(seed: int, count: int, scale: float = 4.0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield PredictorBundle(values=rng.uniform(-scale, scale, 6), cov=np.zeros((6, 6)))
