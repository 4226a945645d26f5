"""Monte Carlo simulation of EPR photon-pair correlation experiments in a local hidden-variables model."""
from .engine import (
    CoincidenceCounts,
    CorrelationCurve,
    RunConfig,
    SweepSpec,
    apply_decoherence,
    emit_pair,
    measure_pair,
    run_setting,
    run_sweep,
)
from .model import AnalyzerSetting, ConfigError, DetectionOutcome, PairEvent, canonical_angle, pbs_measure
from .reference import (
    ModulatorState,
    ReferenceCurve,
    furry_curve,
    modulated_polarization_angle,
    qm_curve,
    sawtooth_curve,
)
from .statistics import (
    ChshReport,
    CorrelationEstimate,
    NoDataError,
    SPhiCurve,
    chsh_experiment,
    chsh_value,
    correlation_coefficient,
    s_phi_curve,
    visibility,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzerSetting",
    "ChshReport",
    "CoincidenceCounts",
    "ConfigError",
    "CorrelationCurve",
    "CorrelationEstimate",
    "DetectionOutcome",
    "ModulatorState",
    "NoDataError",
    "PairEvent",
    "ReferenceCurve",
    "RunConfig",
    "SPhiCurve",
    "SweepSpec",
    "apply_decoherence",
    "canonical_angle",
    "chsh_experiment",
    "chsh_value",
    "correlation_coefficient",
    "emit_pair",
    "furry_curve",
    "measure_pair",
    "modulated_polarization_angle",
    "pbs_measure",
    "qm_curve",
    "run_setting",
    "run_sweep",
    "s_phi_curve",
    "sawtooth_curve",
    "visibility",
]
