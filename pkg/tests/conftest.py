"""Shared small fixtures for the unit tests.

Everything here is deliberately tiny (27-neuron reservoir, 12-sample
dataset) so the unit test modules stay fast; the full-size benchmark lives
in test_acceptance.py with module-scoped fixtures of its own.
"""

import pytest

from lsmlab.dataset import SyntheticSpec, generate_synthetic
from lsmlab.topology import ReservoirParams, build_input_wiring, build_reservoir


@pytest.fixture(scope="session")
def small_spec():
    return SyntheticSpec(
        n_classes=3,
        n_channels=6,
        samples_per_class=4,
        duration=200.0,
        n_segments=4,
        n_groups=3,
        rate_hi_hz=150.0,
        n_twin_pairs=0,
        seed=7,
    )


@pytest.fixture(scope="session")
def small_dataset(small_spec):
    return generate_synthetic(small_spec)


@pytest.fixture(scope="session")
def small_params():
    return ReservoirParams(n_neurons=27, grid=(3, 3, 3), lam=2.0, seed=3)


@pytest.fixture(scope="session")
def small_graph(small_params):
    return build_reservoir(small_params)


@pytest.fixture(scope="session")
def small_wiring(small_params):
    return build_input_wiring(6, 4, small_params.n_neurons, small_params.seed)
