"""Monte Carlo engine: pair emission, decoherence, per-setting tallies, sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence, TypeVar

from . import kernels
from .model import (
    HALF_PI,
    TWO_PI,
    AnalyzerSetting,
    ConfigError,
    DetectionOutcome,
    PairEvent,
    canonical_angle,
    pbs_measure,
)
from .rng import MASK64, CounterStream, SettingStreams

ENDPOINT_TOL = 1e-9

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class SweepSpec:
    start: float = 0.0
    stop: float = math.pi
    step: float = math.pi / 100

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise ConfigError("sweep bounds must be finite")
        if self.step <= 0:
            raise ConfigError(f"sweep step must be > 0, got {self.step!r}")
        if not self.start < self.stop:
            raise ConfigError(f"sweep start must be < stop, got {self.start!r} >= {self.stop!r}")

    def __len__(self) -> int:
        span = self.stop - self.start
        k = math.floor(span / self.step)
        # include the stop angle when the span is a whole number of steps
        if abs((k + 1) * self.step - span) <= ENDPOINT_TOL:
            k += 1
        elif k * self.step - span > ENDPOINT_TOL:
            k -= 1
        return k + 1

    def alphas(self) -> list[float]:
        return [self.start + i * self.step for i in range(len(self))]


@dataclass(frozen=True)
class RunConfig:
    seed: int
    pairs_per_setting: int = 10000
    decoherence: float = 0.0
    threshold: float = 0.0
    beta: float = 0.0
    sweep: SweepSpec = field(default_factory=SweepSpec)
    runs: int = 1
    # per-arm overrides of the shared threshold
    threshold1: float | None = None
    threshold2: float | None = None

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.pairs_per_setting < 1:
            raise ConfigError(f"pairs_per_setting must be >= 1, got {self.pairs_per_setting!r}")
        if not 0.0 <= self.decoherence <= 1.0:
            raise ConfigError(f"decoherence must be in [0, 1], got {self.decoherence!r}")
        for name in ("threshold", "threshold1", "threshold2"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v < 0.5:
                raise ConfigError(f"{name} must be in [0, 0.5), got {v!r}")
        if not math.isfinite(self.beta):
            raise ConfigError(f"beta must be finite, got {self.beta!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs!r}")

    @property
    def arm_thresholds(self) -> tuple[float, float]:
        t1 = self.threshold if self.threshold1 is None else self.threshold1
        t2 = self.threshold if self.threshold2 is None else self.threshold2
        return t1, t2

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("threshold1", "threshold2"):
            if d[k] is None:
                del d[k]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if isinstance(d.get("sweep"), dict):
            d["sweep"] = SweepSpec(**d["sweep"])
        return cls(**d)


@dataclass(frozen=True)
class CoincidenceCounts:
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    n_discarded: int

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm + self.n_discarded

    @property
    def detected(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.n_pp, self.n_pm, self.n_mp, self.n_mm, self.n_discarded)


@dataclass(frozen=True)
class CorrelationCurve:
    points: tuple[tuple[float, CoincidenceCounts], ...]
    config: RunConfig
    run_index: int = 0

    @property
    def alphas(self) -> list[float]:
        return [a for a, _ in self.points]

    @property
    def n_pp(self) -> list[int]:
        return [c.n_pp for _, c in self.points]

    def __len__(self) -> int:
        return len(self.points)


# --- single-pair operations (reference path) --------------------------------


def emit_pair(stream: CounterStream) -> PairEvent:
    """Draw a pair: photon 2 at ``2*pi*u``, photon 1 a quarter turn ahead."""
    psi2 = canonical_angle(TWO_PI * stream.uniform())
    return PairEvent(psi1=psi2 + HALF_PI, psi2=psi2)


def apply_decoherence(
    pair: PairEvent,
    d: float,
    stream: CounterStream,
    stream2: CounterStream | None = None,
) -> PairEvent:
    """Jitter each photon's phase uniformly on ``[-d*pi/2, d*pi/2)``.

    Photon 1 draws from ``stream``; photon 2 from ``stream2`` if given,
    otherwise from the next draw of ``stream``.
    """
    if not 0.0 <= d <= 1.0:
        raise ConfigError(f"decoherence must be in [0, 1], got {d!r}")
    if d == 0.0:
        return pair
    width = d * math.pi
    e1 = (stream.uniform() - 0.5) * width
    e2 = ((stream2 or stream).uniform() - 0.5) * width
    return PairEvent(psi1=pair.psi1 + e1, psi2=pair.psi2 + e2)


def measure_pair(
    pair: PairEvent, setting1: AnalyzerSetting, setting2: AnalyzerSetting
) -> tuple[DetectionOutcome, DetectionOutcome]:
    return pbs_measure(pair.psi1, setting1), pbs_measure(pair.psi2, setting2)


def tally(outcomes: Iterable[tuple[DetectionOutcome, DetectionOutcome]]) -> CoincidenceCounts:
    n = [0, 0, 0, 0, 0]
    for o1, o2 in outcomes:
        if o1 == DetectionOutcome.UNDETECTED or o2 == DetectionOutcome.UNDETECTED:
            n[4] += 1
        else:
            n[(0 if o1 == DetectionOutcome.PLUS else 2) + (0 if o2 == DetectionOutcome.PLUS else 1)] += 1
    return CoincidenceCounts(*n)


def run_setting_reference(
    alpha: float, config: RunConfig, streams: SettingStreams | None = None, run_index: int = 0
) -> CoincidenceCounts:
    """Pure-Python pair-by-pair loop; slow, used to cross-check the kernels."""
    if streams is None:
        streams = SettingStreams.derive(config.seed, run_index, alpha, config.beta)
    t1, t2 = config.arm_thresholds
    s1 = AnalyzerSetting(alpha, t1)
    s2 = AnalyzerSetting(config.beta, t2)

    def outcomes():
        for i in range(config.pairs_per_setting):
            pol, d1, d2 = streams.for_pair(i)
            pair = apply_decoherence(emit_pair(pol), config.decoherence, d1, d2)
            yield measure_pair(pair, s1, s2)

    return tally(outcomes())


# --- bulk operations ----------------------------------------------------------


def run_setting(
    alpha: float,
    config: RunConfig,
    streams: SettingStreams | None = None,
    *,
    run_index: int = 0,
    backend: str | None = None,
) -> CoincidenceCounts:
    """Tally ``config.pairs_per_setting`` pairs with photon 1 at ``alpha``.

    Photon 2 is measured at ``config.beta``.  Streams default to the ones keyed
    by ``(config.seed, run_index, alpha, config.beta)``.
    """
    if streams is None:
        streams = SettingStreams.derive(config.seed, run_index, alpha, config.beta)
    t1, t2 = config.arm_thresholds
    counts = CoincidenceCounts(
        *kernels.count_setting(
            streams.polarization,
            streams.decoherence_arm1,
            streams.decoherence_arm2,
            config.pairs_per_setting,
            canonical_angle(alpha),
            canonical_angle(config.beta),
            t1,
            t2,
            config.decoherence * math.pi,
            backend=backend,
        )
    )
    if counts.total != config.pairs_per_setting:
        raise AssertionError(f"count conservation violated: {counts} vs N={config.pairs_per_setting}")
    return counts


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1, backend: str | None = None) -> list[R]:
    """Map ``fn`` over ``items``, results in input order.

    The numba kernel parallelizes internally, so on that backend ``workers``
    sets its thread count and the items run one after another; the numpy
    backend fans items out over a thread pool instead.
    """
    workers = max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    if kernels.resolve_backend(backend) == "numba":
        kernels.set_threads(workers)
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_sweep(
    config: RunConfig,
    run_index: int = 0,
    *,
    workers: int = 1,
    backend: str | None = None,
) -> CorrelationCurve:
    config.validate()
    if run_index < 0:
        raise ConfigError(f"run_index must be >= 0, got {run_index}")
    alphas = config.sweep.alphas()
    counts = parallel_map(
        lambda a: run_setting(a, config, run_index=run_index, backend=backend),
        alphas,
        workers,
        backend,
    )
    return CorrelationCurve(tuple(zip(alphas, counts)), config, run_index)
