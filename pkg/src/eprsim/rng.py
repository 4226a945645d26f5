"""Keyed counter-based random streams.

Generator ``splitmix64-ctr/1``: draw ``i`` (0-based) of the stream with key
``k`` is the ``i``-th SplitMix64 output seeded with ``k``, i.e. the SplitMix64
finalizer applied to ``k + (i + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``.  A draw
becomes a double on ``[0, 1)`` from its top 53 bits.  Because every draw is a
pure function of ``(key, i)``, pairs can be generated in any order, in
chunks, or in parallel with identical results.

Stream keys are derived with :class:`numpy.random.SeedSequence` from
``(seed, run, alpha, beta, purpose)``, where the analyzer angles enter as
canonical integer nanoradians so that a setting keeps its stream no matter
which sweep it appears in.
"""
from __future__ import annotations

from dataclasses import dataclass
import enum

import numpy as np

from .model import TWO_PI, canonical_angle

GENERATOR_ID = "splitmix64-ctr/1"

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)

_NANORAD_PERIOD = round(TWO_PI * 1e9)


class Purpose(enum.IntEnum):
    POLARIZATION = 0
    DECOHERENCE_ARM1 = 1
    DECOHERENCE_ARM2 = 2


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def draw_u64(key: int, index: int) -> int:
    return mix64((key + (index + 1) * GOLDEN) & MASK64)


def draw_uniform(key: int, index: int) -> float:
    return (draw_u64(key, index) >> 11) * INV_2_53


def uniform_array(key: int, start: int, stop: int) -> np.ndarray:
    """Draws ``start..stop-1`` of stream ``key`` as float64, vectorized."""
    ctr = np.arange(start + 1, stop + 1, dtype=np.uint64)
    z = np.uint64(key) + ctr * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * INV_2_53


def angle_key(angle: float) -> int:
    """Canonical integer nanoradians of an angle, in ``[0, round(2*pi*1e9))``."""
    return round(canonical_angle(angle) * 1e9) % _NANORAD_PERIOD


def derive_key(seed: int, run: int, alpha: float, beta: float, purpose: Purpose) -> int:
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(
        entropy=seed,
        spawn_key=(int(run), angle_key(alpha), angle_key(beta), int(purpose)),
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class CounterStream:
    """Sequential view of one keyed stream; ``uniform()`` advances the counter."""

    __slots__ = ("key", "index")

    def __init__(self, key: int, index: int = 0) -> None:
        self.key = key & MASK64
        self.index = index

    def uniform(self) -> float:
        u = draw_uniform(self.key, self.index)
        self.index += 1
        return u

    def at(self, index: int) -> "CounterStream":
        return CounterStream(self.key, index)


@dataclass(frozen=True)
class SettingStreams:
    """The three keyed streams that feed one analyzer setting of one run."""

    polarization: int
    decoherence_arm1: int
    decoherence_arm2: int

    @classmethod
    def derive(cls, seed: int, run: int, alpha: float, beta: float) -> "SettingStreams":
        return cls(
            derive_key(seed, run, alpha, beta, Purpose.POLARIZATION),
            derive_key(seed, run, alpha, beta, Purpose.DECOHERENCE_ARM1),
            derive_key(seed, run, alpha, beta, Purpose.DECOHERENCE_ARM2),
        )

    def for_pair(self, index: int) -> tuple[CounterStream, CounterStream, CounterStream]:
        return (
            CounterStream(self.polarization, index),
            CounterStream(self.decoherence_arm1, index),
            CounterStream(self.decoherence_arm2, index),
        )
