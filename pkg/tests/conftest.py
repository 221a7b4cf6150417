import numpy as np
import pytest

from survcluster.records import make_records
from survcluster.simulate import (
    DEFAULT_ADMIN_HORIZON,
    DEFAULT_CENSOR_SCALE,
    THREE_GROUP_WEIBULL,
    simulate_survival,
)

FIXTURES = "tests/fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(2020)


def random_survival(rng, n, censor_frac=0.3, scale=10.0):
    """Small random censored sample with at least one event."""
    times = rng.exponential(scale, n)
    events = rng.random(n) >= censor_frac
    if not events.any():
        events[int(rng.integers(n))] = True
    return times, events


@pytest.fixture
def mixed_records(rng):
    times, events = random_survival(rng, 40)
    return make_records(times, events)


def three_group_survival(truth, seed):
    """Observed (times, events) for given labels under the preset survival laws."""
    rng = np.random.default_rng(seed)
    return simulate_survival(
        truth, THREE_GROUP_WEIBULL, DEFAULT_CENSOR_SCALE, DEFAULT_ADMIN_HORIZON, rng
    )
