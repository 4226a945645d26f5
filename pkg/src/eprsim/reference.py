"""Analytic reference curves and the modulator phase relation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LABELS = ("furry", "qm", "sawtooth")


@dataclass(frozen=True)
class ReferenceCurve:
    label: str
    points: tuple[tuple[float, float], ...]

    @property
    def deltas(self) -> list[float]:
        return [d for d, _ in self.points]

    @property
    def expected_counts(self) -> list[float]:
        return [v for _, v in self.points]


@dataclass(frozen=True)
class ModulatorState:
    e0x: float
    e0y: float
    dpsi: float
    phase: float

    def __post_init__(self) -> None:
        if self.e0x == 0 and self.e0y == 0:
            raise ValueError("field amplitudes e0x and e0y cannot both be zero")


def _check_deltas(deltas: Sequence[float]) -> list[float]:
    d = [float(x) for x in deltas]
    if any(b <= a for a, b in zip(d, d[1:])):
        raise ValueError("deltas must be strictly increasing")
    return d


def furry_probability(delta: float, quadrature_steps: int = 10_000) -> float:
    """Mean over phi in [0, 2pi) of cos^2(phi + pi/2 - delta) cos^2(phi).

    Periodic trapezoid rule (equal weights on ``quadrature_steps`` nodes).
    """
    if quadrature_steps < 100:
        raise ValueError("quadrature_steps must be >= 100")
    phi = np.arange(quadrature_steps) * (2.0 * math.pi / quadrature_steps)
    f = np.cos(phi + math.pi / 2 - delta) ** 2 * np.cos(phi) ** 2
    return float(f.mean())


def furry_curve(n_pairs: int, deltas: Sequence[float], quadrature_steps: int = 10_000) -> ReferenceCurve:
    """Coincidences from Furry's integral, normalized so the minimum is n/8."""
    d = _check_deltas(deltas)
    return ReferenceCurve("furry", tuple((x, n_pairs * furry_probability(x, quadrature_steps)) for x in d))


def furry_closed_form(n_pairs: int, delta: float) -> float:
    return n_pairs / 4.0 * (1.0 - 0.5 * math.cos(2.0 * delta))


def qm_curve(n_pairs: int, deltas: Sequence[float]) -> ReferenceCurve:
    d = _check_deltas(deltas)
    return ReferenceCurve("qm", tuple((x, n_pairs / 2.0 * math.sin(x) ** 2) for x in d))


def triangle(delta: float) -> float:
    """Period-pi triangle wave: ``delta`` on [0, pi/2], reflected on [pi/2, pi]."""
    r = delta % math.pi
    return r if r <= math.pi / 2 else math.pi - r


def sawtooth_curve(n_pairs: int, deltas: Sequence[float]) -> ReferenceCurve:
    """Exact ideal-model coincidences ``n * tri(delta) / pi``."""
    d = _check_deltas(deltas)
    return ReferenceCurve("sawtooth", tuple((x, n_pairs * triangle(x) / math.pi) for x in d))


def reference_curve(label: str, n_pairs: int, deltas: Sequence[float], quadrature_steps: int = 10_000) -> ReferenceCurve:
    if label == "furry":
        return furry_curve(n_pairs, deltas, quadrature_steps)
    if label == "qm":
        return qm_curve(n_pairs, deltas)
    if label == "sawtooth":
        return sawtooth_curve(n_pairs, deltas)
    raise ValueError(f"unknown reference model {label!r}; expected one of {', '.join(LABELS)}")


def modulated_field(state: ModulatorState) -> tuple[float, float]:
    """Field components after the modulator delays the y component by ``dpsi``."""
    return (
        state.e0x * math.cos(state.phase),
        state.e0y * math.cos(state.phase + state.dpsi),
    )


def modulated_polarization_angle(state: ModulatorState) -> float:
    """Polarization angle after the modulator, in (-pi/2, pi/2].

    ``arctan[(e0y/e0x)(cos dpsi - tan(phase) sin dpsi)]``.  With ``dpsi == 0``
    the phase drops out.  At a pole of tan the limiting angle pi/2 is returned
    (the two one-sided limits coincide modulo pi); ``e0x == 0`` likewise gives
    pi/2, a field along y.
    """
    if state.e0x == 0:
        return math.pi / 2
    ratio = state.e0y / state.e0x
    if state.dpsi == 0:
        return math.atan(ratio)
    sin_dpsi = math.sin(state.dpsi)
    arg = ratio * (math.cos(state.dpsi) - math.tan(state.phase) * sin_dpsi)
    if not math.isfinite(arg):
        return math.pi / 2
    # near a pole arg is huge and atan returns the one-sided limit +-pi/2
    return math.atan(arg)
