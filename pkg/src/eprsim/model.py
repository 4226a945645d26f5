"""Measurement physics: angle arithmetic and the dichotomizing beam splitter switch."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


class ConfigError(ValueError):
    """Raised when a configuration value is outside its allowed range."""


def canonical_angle(x: float) -> float:
    """Reduce ``x`` (radians) into ``[0, 2*pi)``."""
    if not math.isfinite(x):
        raise ConfigError(f"angle must be finite, got {x!r}")
    r = x % TWO_PI
    # x % 2pi can round up to exactly 2pi for tiny negative x
    return 0.0 if r >= TWO_PI else r


class DetectionOutcome(enum.IntEnum):
    MINUS = -1
    UNDETECTED = 0
    PLUS = 1


@dataclass(frozen=True)
class AnalyzerSetting:
    """One measurement station: polarizer orientation and PBS dead-band half-width."""

    angle: float
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.threshold < 0.5):
            raise ConfigError(f"threshold must be in [0, 0.5), got {self.threshold!r}")
        object.__setattr__(self, "angle", canonical_angle(float(self.angle)))


@dataclass(frozen=True)
class PairEvent:
    """Hidden phases of both photons at their analyzers."""

    psi1: float
    psi2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi1", canonical_angle(float(self.psi1)))
        object.__setattr__(self, "psi2", canonical_angle(float(self.psi2)))


def pbs_measure(psi: float, setting: AnalyzerSetting) -> DetectionOutcome:
    """Route a photon with hidden phase ``psi`` through a thresholded PBS.

    Plus is tested first, so at ``threshold == 0`` the tie ``cos^2 == 0.5``
    resolves to Plus.
    """
    c = math.cos(canonical_angle(psi) - setting.angle) ** 2
    if c >= 0.5 + setting.threshold:
        return DetectionOutcome.PLUS
    if c <= 0.5 - setting.threshold:
        return DetectionOutcome.MINUS
    return DetectionOutcome.UNDETECTED
