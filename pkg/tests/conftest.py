"""Shared fixtures and hypothesis profile for the test suite."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# One deterministic profile for the whole suite: property tests must never be
# the flaky part of a numerics package.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=30,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_blobs(dim, n_classes, per_class, spread, within_std, seed):
    """Small wrapper so tests read as intent, not argument soup."""
    from rlda import synth_gaussian_classes

    return synth_gaussian_classes(dim, n_classes, per_class, spread, within_std, seed)
