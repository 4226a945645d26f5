"""Correlation estimates, visibility, CHSH and S(phi) from coincidence counts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import CoincidenceCounts, CorrelationCurve, RunConfig, parallel_map, run_setting

DEG = math.pi / 180.0

# (alpha, beta) for E(a,b), E(a,b'), E(a',b), E(a',b') with a=0, a'=45, b=22.5, b'=67.5 degrees
CHSH_SETTINGS: tuple[tuple[float, float], ...] = (
    (0.0, 22.5 * DEG),
    (0.0, 67.5 * DEG),
    (45.0 * DEG, 22.5 * DEG),
    (45.0 * DEG, 67.5 * DEG),
)

LOCAL_BOUND = 2.0


class NoDataError(RuntimeError):
    """No jointly detected pairs, or an all-zero curve: the statistic is undefined."""


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    detected: int
    discarded: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ChshReport:
    s_values: tuple[float, ...]
    mean: float
    std_dev: float
    std_err: float
    violation_sigma: float
    settings: tuple[tuple[float, float], ...] = CHSH_SETTINGS

    @property
    def abs_mean(self) -> float:
        return abs(self.mean)


@dataclass(frozen=True)
class SPhiCurve:
    points: tuple[tuple[float, float], ...]
    # cross-run sample std per point; zeros when runs == 1
    std_dev: tuple[float, ...] = ()

    @property
    def phis(self) -> list[float]:
        return [p for p, _ in self.points]

    @property
    def s(self) -> list[float]:
        return [s for _, s in self.points]


def correlation_coefficient(counts: CoincidenceCounts) -> CorrelationEstimate:
    detected = counts.detected
    if detected == 0:
        raise NoDataError(f"no jointly detected pairs in {counts}")
    value = (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / detected
    return CorrelationEstimate(value, detected, counts.n_discarded)


def chsh_value(e_ab, e_ab2, e_a2b, e_a2b2) -> float:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b').  Accepts estimates or floats."""
    return float(e_ab) - float(e_ab2) + float(e_a2b) + float(e_a2b2)


def violation_sigma(mean: float, std_err: float) -> float:
    excess = abs(mean) - LOCAL_BOUND
    if std_err > 0:
        return excess / std_err
    if excess == 0:
        return 0.0
    return math.copysign(math.inf, excess)


def summarize_chsh(s_values: Sequence[float]) -> ChshReport:
    s = np.asarray(s_values, dtype=float)
    mean = float(s.mean())
    std = float(s.std(ddof=1)) if s.size > 1 else 0.0
    se = std / math.sqrt(s.size) if s.size > 1 else 0.0
    return ChshReport(tuple(float(v) for v in s), mean, std, se, violation_sigma(mean, se) if s.size > 1 else math.nan)


def chsh_experiment(config: RunConfig, *, workers: int = 1, backend: str | None = None) -> ChshReport:
    """Run the four canonical CHSH settings ``config.runs`` times.

    ``config.beta`` and ``config.sweep`` are ignored; each setting fixes both
    analyzer angles.  Needs ``runs >= 2`` for a defined spread.
    """
    jobs = [(run, a, b) for run in range(config.runs) for a, b in CHSH_SETTINGS]
    counts = parallel_map(
        lambda job: run_setting(job[1], config.with_(beta=job[2]), run_index=job[0], backend=backend),
        jobs,
        workers,
        backend,
    )
    s_values = []
    for run in range(config.runs):
        block = counts[4 * run : 4 * run + 4]
        s_values.append(chsh_value(*(correlation_coefficient(c) for c in block)))
    return summarize_chsh(s_values)


def visibility(curve) -> float:
    """``(max - min) / (max + min)`` of a coincidence curve.

    Takes a :class:`CorrelationCurve` (uses ``n_pp``), a reference curve (uses
    ``expected_count``) or a plain sequence of counts.
    """
    if isinstance(curve, CorrelationCurve):
        values = curve.n_pp
    elif hasattr(curve, "expected_counts"):
        values = curve.expected_counts
    else:
        values = list(curve)
    if len(values) == 0:
        raise NoDataError("visibility of an empty curve")
    hi, lo = max(values), min(values)
    if hi + lo == 0:
        raise NoDataError("visibility undefined: curve is identically zero")
    return (hi - lo) / (hi + lo)


def s_phi_curve(
    config: RunConfig,
    phis: Sequence[float],
    *,
    workers: int = 1,
    backend: str | None = None,
) -> SPhiCurve:
    """S(phi) = 3 E(phi) - E(3 phi), averaged over ``config.runs``.

    E(delta) is measured with photon 1 at ``config.beta + delta`` and photon 2
    at ``config.beta``.
    """
    for phi in phis:
        if not 0.0 < phi < math.pi / 2:
            raise ValueError(f"phi must lie in (0, pi/2), got {phi!r}")
    deltas = sorted({d for phi in phis for d in (phi, 3.0 * phi)})
    jobs = [(run, d) for run in range(config.runs) for d in deltas]
    counts = parallel_map(
        lambda job: run_setting(config.beta + job[1], config, run_index=job[0], backend=backend),
        jobs,
        workers,
        backend,
    )
    e = {job: correlation_coefficient(c).value for job, c in zip(jobs, counts)}
    per_run = np.array(
        [[3.0 * e[(run, phi)] - e[(run, 3.0 * phi)] for phi in phis] for run in range(config.runs)]
    )
    mean = per_run.mean(axis=0)
    std = per_run.std(axis=0, ddof=1) if config.runs > 1 else np.zeros(len(phis))
    return SPhiCurve(
        tuple((float(p), float(s)) for p, s in zip(phis, mean)),
        tuple(float(v) for v in std),
    )


def phi_grid(steps: int = 50) -> list[float]:
    """Interior grid ``k * (pi/2) / steps`` for ``k = 1..steps-1``."""
    if steps < 2:
        raise ValueError("phi grid needs at least 2 steps")
    return [k * (math.pi / 2) / steps for k in range(1, steps)]
