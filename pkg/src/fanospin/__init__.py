"""Coupled alkali-metal / noble-gas spin-ensemble response toolkit.

Solves the driven non-Hermitian two-mode dynamics of contact-coupled spin
ensembles, fits the asymmetric interference lineshape of the optical
readout, and maps out amplification/deamplification operating points and
sensitivity budgets for magnetometry and pseudo-field sensing.
"""

__version__ = "0.1.0"

from .model import (
    ConfigurationError,
    EigenModes,
    EnsembleParams,
    EpMetrics,
    SystemModel,
    build_matrix,
    delta_to_bz,
    eigenmodes,
    ep_metrics,
    self_compensation_field,
    splitting_slope,
    strong_damping_field,
)
from .response import (
    DriveSpec,
    ReadoutConvention,
    ResponseCurve,
    ResponseError,
    SteadyState,
    ThetaSweep,
    TimeSeries,
    drive_vector,
    normalize_response,
    readout_scale,
    steady_state,
    sweep_frequency,
    sweep_theta,
    time_domain,
)
from .fano import (
    FanoFit,
    FanoProfile,
    amp_deamp_separation,
    amplification_factor,
    deamplification_point,
    eval_fano,
    fit_fano,
)
from .sensing import (
    DecoherenceCurve,
    GradientModel,
    NoiseBudget,
    NoiseEntry,
    PseudoTransduction,
    SensitivityReport,
    deamplification_suppression,
    decoherence_vs_field,
    optimal_theta,
    sensitivity_report,
    transduce_pseudo_field,
)
from .config import REFERENCE_PROFILE, ConfigError, RunConfig, load_config, resolve_config

__all__ = [
    "__version__",
    # model
    "ConfigurationError", "EigenModes", "EnsembleParams", "EpMetrics", "SystemModel",
    "build_matrix", "delta_to_bz", "eigenmodes", "ep_metrics",
    "self_compensation_field", "splitting_slope", "strong_damping_field",
    # response
    "DriveSpec", "ReadoutConvention", "ResponseCurve", "ResponseError", "SteadyState",
    "ThetaSweep", "TimeSeries", "drive_vector", "normalize_response", "readout_scale",
    "steady_state", "sweep_frequency", "sweep_theta", "time_domain",
    # fano
    "FanoFit", "FanoProfile", "amp_deamp_separation", "amplification_factor",
    "deamplification_point", "eval_fano", "fit_fano",
    # sensing
    "DecoherenceCurve", "GradientModel", "NoiseBudget", "NoiseEntry",
    "PseudoTransduction", "SensitivityReport", "deamplification_suppression",
    "decoherence_vs_field", "optimal_theta", "sensitivity_report",
    "transduce_pseudo_field",
    # config
    "REFERENCE_PROFILE", "ConfigError", "RunConfig", "load_config", "resolve_config",
]
