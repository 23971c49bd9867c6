import numpy as np
import pytest

from sinoma.series import PairedSeries, Series

# Eight-point ramp with fixed recorded perturbations; y is twice the clean
# ramp plus its own perturbations. All expected moments in the tests were
# frozen from an exact rational-arithmetic summation over these values.
FIXTURE_X = [1.1, 1.9, 3.2, 3.8, 5.1, 5.9, 7.2, 7.8]
FIXTURE_Y = [1.7, 4.3, 5.9, 8.1, 9.7, 12.3, 13.9, 16.1]


@pytest.fixture
def fixture_pair() -> PairedSeries:
    return PairedSeries(Series(FIXTURE_X), Series(FIXTURE_Y))


def random_valid_pair(rng: np.random.Generator, n_min=16, n_max=200) -> PairedSeries:
    """A fuzzed pair with positive covariance and noise on both streams.

    Noise floors keep the pair away from collinearity, where the
    noise-ratio inversion is intrinsically ill-conditioned.
    """
    n = int(rng.integers(n_min, n_max))
    x = np.cumsum(rng.standard_normal(n))
    a = float(rng.uniform(0.2, 5.0))
    y = a * x + rng.standard_normal(n) * float(rng.uniform(0.05, 1.0)) * max(np.std(a * x), 1e-6)
    xn = x + rng.standard_normal(n) * float(rng.uniform(0.05, 1.0)) * max(np.std(x), 1e-6)
    pair = PairedSeries(Series(xn), Series(y))
    if pair.summary.cov_xy <= 0.0:
        pair = PairedSeries(Series(xn), Series(-y))
    return pair
