import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from thetadet.core import admissible_types, random_siegel, validate_period_matrix, validate_polarization

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

SMALL_TYPES = [D.diag for D in admissible_types(12, 3) if D.diag[-1] <= 6]


@st.composite
def polarizations(draw, max_g=3, types=None):
    pool = [t for t in (types or SMALL_TYPES) if len(t) <= max_g]
    return validate_polarization(draw(st.sampled_from(pool)))


@st.composite
def seeds(draw):
    return draw(st.integers(min_value=0, max_value=2**32 - 1))


def period(rng, D):
    return validate_period_matrix(random_siegel(rng, D.g), D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
