"""
RNG Core - Seedable Random Streams

Deterministic, splittable random streams and the primitive draws the kernels
need. Every stream is a numpy PCG64 generator seeded through a SeedSequence
whose spawn key is the stream id, so (seed, stream_id) fixes the sequence on
every platform and sibling streams are independent.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import InvalidParameterError

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence(entropy=seed, spawn_key=(stream_id,))"

_U64_MAX = 2 ** 64 - 1

Size = Optional[int]


@dataclass(frozen=True)
class DrawCounts:
    """Entropy consumed: continuous variates and sign bits."""

    continuous: int = 0
    sign_bits: int = 0

    def __add__(self, other: 'DrawCounts') -> 'DrawCounts':
        return DrawCounts(self.continuous + other.continuous, self.sign_bits + other.sign_bits)


def _check_u64(name: str, value: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if not 0 <= int(value) <= _U64_MAX:
        raise InvalidParameterError(f"{name} must fit in 64 unsigned bits, got {value}")
    return int(value)


class RngStream:
    """A single-owner random stream identified by (seed, stream_id)."""

    def __init__(self, seed: int, stream_id: int = 0):
        """Initialize the stream."""
        self.seed = _check_u64("seed", seed)
        self.stream_id = _check_u64("stream_id", stream_id)

        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._bit_generator = np.random.PCG64(sequence)
        self._generator = np.random.Generator(self._bit_generator)

        # Counters
        self.continuous_draws = 0
        self.sign_bits = 0

    @property
    def counts(self) -> DrawCounts:
        """Cumulative draws taken from this stream."""
        return DrawCounts(self.continuous_draws, self.sign_bits)

    def half_normal(self, sigma: float, size: Size = None) -> Union[float, np.ndarray]:
        """|N(0, sigma^2)|, one continuous draw per variate."""
        z = self._generator.standard_normal(size)
        self.continuous_draws += 1 if size is None else int(size)
        if size is None:
            return sigma * abs(float(z))
        return sigma * np.abs(z)

    def std_normal_vec(self, d: int, sigma: float, size: Size = None) -> np.ndarray:
        """d iid N(0, sigma^2) draws, shape (d,) or (size, d)."""
        shape: Union[int, Tuple[int, int]] = d if size is None else (int(size), d)
        z = self._generator.standard_normal(shape)
        self.continuous_draws += d if size is None else int(size) * d
        return sigma * z

    def signs(self, d: int, size: Size = None) -> np.ndarray:
        """d iid signs in {-1, +1}, packed 64 per raw word."""
        n_bits = d if size is None else int(size) * d
        n_words = -(-n_bits // 64)
        words = self._bit_generator.random_raw(n_words).astype('<u8')
        bits = np.unpackbits(words.view(np.uint8), bitorder='little')[:n_bits]
        self.sign_bits += n_bits
        out = 2.0 * bits - 1.0
        return out if size is None else out.reshape(int(size), d)

    def uniform(self, size: Size = None) -> Union[float, np.ndarray]:
        """Uniform on [0, 1), one continuous draw per variate."""
        u = self._generator.random(size)
        self.continuous_draws += 1 if size is None else int(size)
        return float(u) if size is None else u

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def spawn_streams(seed: int, count: int, first_id: int = 0) -> List[RngStream]:
    """Streams with consecutive ids first_id, first_id+1, ... under one seed."""
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    return [RngStream(seed, first_id + i) for i in range(count)]


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise InvalidParameterError(f"sigma must be positive and finite, got {sigma}")
    return sigma


def _check_dim(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidParameterError(f"d must be a positive integer, got {d!r}")
    return int(d)


def draw_half_normal(stream: RngStream, sigma: float, size: Size = None):
    """Draw eps ~ TN_{>0}(0, sigma^2) as |N(0, sigma^2)| (location is always 0)."""
    return stream.half_normal(_check_sigma(sigma), size)


def draw_signs(stream: RngStream, d: int, size: Size = None) -> np.ndarray:
    """Draw d independent equiprobable signs."""
    return stream.signs(_check_dim(d), size)


def draw_std_normal_vec(stream: RngStream, d: int, sigma: float, size: Size = None) -> np.ndarray:
    """Draw d iid N(0, sigma^2) increments."""
    return stream.std_normal_vec(_check_dim(d), _check_sigma(sigma), size)


def draw_uniform(stream: RngStream, size: Size = None):
    """Draw the accept-test uniform(s)."""
    return stream.uniform(size)
