"""Shared fixtures and the scripted-draw stream double."""

import hypothesis
import numpy as np
import pytest

from core.rng_core import DrawCounts, RngStream
from core.targets import make_target

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.load_profile("fast")


class ScriptedStream:
    """Stream double returning fixed draws, for deterministic kernel tests.

    eps is returned by every half-normal draw, signs/increments by every sign
    or normal-vector draw, and uniform by every accept test (0.0 forces
    acceptance, 1.0 forces rejection).
    """

    seed = None
    stream_id = None

    def __init__(self, eps=0.0, signs=None, increments=None, uniform=0.0):
        self.eps = float(eps)
        self._signs = None if signs is None else np.asarray(signs, dtype=float)
        self._increments = None if increments is None else np.asarray(increments, dtype=float)
        self._uniform = float(uniform)
        self.continuous_draws = 0
        self.sign_bits = 0

    @property
    def counts(self):
        return DrawCounts(self.continuous_draws, self.sign_bits)

    def half_normal(self, sigma, size=None):
        self.continuous_draws += 1
        return self.eps

    def signs(self, d, size=None):
        self.sign_bits += d
        return np.ones(d) if self._signs is None else self._signs.copy()

    def std_normal_vec(self, d, sigma, size=None):
        self.continuous_draws += d
        return np.zeros(d) if self._increments is None else self._increments.copy()

    def uniform(self, size=None):
        self.continuous_draws += 1
        return self._uniform


@pytest.fixture
def stream():
    return RngStream(seed=12345, stream_id=0)


@pytest.fixture
def std_normal_2d():
    return make_target("gaussian", 1.0, 2)


@pytest.fixture
def std_normal_1d():
    return make_target("gaussian", 1.0, 1)
