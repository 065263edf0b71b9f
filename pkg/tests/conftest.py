import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mgroupoid import fixtures

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=sorted(fixtures.FIXTURES))
def G(request):
    return fixtures.get(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
