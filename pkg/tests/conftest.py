import math

import numpy as np
import pytest
from hypothesis import strategies as st

from goldfish import hamfam
from goldfish.hamfam import PhaseState

LN2 = math.log(2.0)


@pytest.fixture
def worked_state():
    """p = (0, ln 2), q = (0, 1): family polynomial z + 1 for the goldfish."""
    return PhaseState([0.0, LN2], [0.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_states(seed, N, count, box=1.0, min_sep=0.1):
    rng = np.random.default_rng(seed)
    return [hamfam.random_state(rng, N, box=box, min_sep=min_sep) for _ in range(count)]


def separated(values, min_sep=0.1):
    z = np.asarray(values)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return z.size < 2 or d.min() >= min_sep


finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
complex_scalars = st.builds(complex, finite, finite)


def complex_vectors(min_size=1, max_size=6, min_sep=0.1):
    return (st.lists(complex_scalars, min_size=min_size, max_size=max_size)
            .map(np.array)
            .filter(lambda z: separated(z, min_sep)))
