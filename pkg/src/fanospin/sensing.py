"""Derived sensing analyses: decoherence control, operating directions,
pseudo-field transduction, and sensitivity budgets."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .model import TWO_PI, SystemModel, eigenmodes
from .response import DriveSpec, ResponseCurve, drive_vector, normalize_response, \
    readout_scale, steady_state, sweep_frequency
from .fano import amplification_factor

# Energy-equivalent of 1 fT/sqrt(Hz) of field sensitivity for this sensor
# class [eV per fT]; fixed so that 3.5 fT/sqrt(Hz) corresponds to
# 2.7e-23 eV/sqrt(Hz).
ENERGY_PER_FT_EV = 2.7e-23 / 3.5

NOISE_KINDS = ("non-interacting", "field-like")


@dataclass(frozen=True)
class GradientModel:
    """Decoherence from bias-field inhomogeneity.

    epsilon_g is the fractional field spread, tau_c the effective correlation
    time [s]; the broadening enters as the motional-narrowing rate
    (gamma_b * epsilon_g * |Bz|)**2 * tau_c.
    """

    epsilon_g: float = 4e-4
    tau_c: float = 4.8644e-3
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.epsilon_g < 0.0:
            raise ValueError(f"epsilon_g must be >= 0, got {self.epsilon_g}")
        if not self.tau_c > 0.0:
            raise ValueError(f"tau_c must be > 0, got {self.tau_c}")


@dataclass(frozen=True)
class NoiseEntry:
    name: str
    level_ft: float  # equivalent field noise [fT/sqrt(Hz)]
    kind: str        # 'non-interacting' (readout-chain) or 'field-like'

    def __post_init__(self) -> None:
        if self.level_ft < 0.0:
            raise ValueError(f"noise level must be >= 0, got {self.level_ft}")
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class NoiseBudget:
    """Spectral noise densities of the readout chain and the environment."""

    entries: tuple[NoiseEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("noise budget must contain at least one entry")

    @classmethod
    def of(cls, detection_ft: float, magnetic_ft: float = 0.0) -> "NoiseBudget":
        entries = [NoiseEntry("detection", detection_ft, "non-interacting")]
        if magnetic_ft > 0.0:
            entries.append(NoiseEntry("magnetic", magnetic_ft, "field-like"))
        return cls(entries=tuple(entries))


@dataclass(frozen=True)
class SensitivityReport:
    operating_point: str
    effective_sensitivity_ft: float
    suppression_or_gain_db: float
    energy_resolution_ev: float


@dataclass(frozen=True)
class DecoherenceCurve:
    bz: np.ndarray
    rate: np.ndarray      # dressed noble-gas decay rate + gradient term [rad/s]
    time_s: np.ndarray    # inverse rate [s]


def gradient_rate(model: SystemModel, bz: np.ndarray, gradient: GradientModel) -> np.ndarray:
    """Additive gradient-broadening rate [rad/s] at bias field bz [mG]."""
    bz = np.asarray(bz, dtype=float)
    if not gradient.enabled:
        return np.zeros_like(bz)
    return (model.b.gamma * gradient.epsilon_g * np.abs(bz)) ** 2 * gradient.tau_c


def decoherence_vs_field(
    model: SystemModel, bz_grid: np.ndarray, gradient: GradientModel
) -> DecoherenceCurve:
    """Dressed noble-gas decoherence across a bias-field grid.

    With the gradient disabled the curve is the pure dressed rate from the
    eigenmodes; enabling it adds the motional-narrowing term, which bends the
    high-field wings back down.
    """
    bz = np.asarray(bz_grid, dtype=float)
    rate = np.array([eigenmodes(model.with_bz(b)).Gamma_tilde_b for b in bz])
    rate = rate + gradient_rate(model, bz, gradient)
    return DecoherenceCurve(bz=bz, rate=rate, time_s=1.0 / rate)


def optimal_theta(model: SystemModel, Bz: float) -> float:
    """Drive azimuth maximizing interference suppression at bias field Bz.

    theta* = arccot(gamma_a*(Bz + m_a + m_b)/Gamma_a), principal value in
    (0, pi).  At Bz = -(m_a + m_b) this is pi/2; for large arguments it
    approaches 0 or pi.
    """
    if not model.a.Gamma > 0.0:
        raise ValueError("alkali decay rate must be positive")
    x = model.a.gamma * (Bz + model.a.mz_field + model.b.mz_field) / model.a.Gamma
    return math.atan2(1.0, x)


@dataclass(frozen=True)
class PseudoTransduction:
    """Pseudo-field drive converted to the equivalent real-field readout."""

    gain: float                 # equivalent field / pseudo-field amplitude
    equivalent_field_mg: float  # real-field amplitude giving the same readout
    readout_amplitude: float
    responsivity: float         # alkali-only readout per unit field amplitude


def _alkali_only_amplitude(model: SystemModel, drive: DriveSpec) -> float:
    """Readout of the bare alkali magnetometer for a real transverse field.

    Single-mode steady state (no noble-gas coupling) with the same
    amplitude, azimuth, and frequency; the alkali still precesses at its
    in-situ frequency omega_a.
    """
    h_p, h_m = drive_vector(model, DriveSpec(drive.amplitude, drive.freq,
                                             drive.theta, "pseudo_a"))
    omega = TWO_PI * drive.freq
    Haa = model.omega_a + 1j * model.a.Gamma
    a_p = 1j * h_p[0] / (omega + Haa)
    a_m = -1j * h_m[0] / (omega - Haa)
    return float(abs(readout_scale(model) * (a_p + np.conj(a_m))))


def transduce_pseudo_field(model: SystemModel, drive: DriveSpec) -> PseudoTransduction:
    """Equivalent magnetic readout of a single-species pseudo-field drive.

    The steady-state readout is divided by the alkali-magnetometer
    responsivity to a real field of the same amplitude, azimuth, and
    frequency.  Driving the noble gas at the dressed resonance along the
    optimal azimuth yields a gain matching the amplification factor; driving
    the alkali far from the noble-gas resonance yields a gain of one.
    """
    if drive.mode not in ("pseudo_a", "pseudo_b"):
        raise ValueError(f"transduction requires a pseudo drive mode, got {drive.mode!r}")
    if drive.amplitude <= 0.0:
        raise ValueError("pseudo-field amplitude must be positive")
    readout = steady_state(model, drive).amplitude
    per_unit = _alkali_only_amplitude(model, drive) / drive.amplitude
    if not per_unit > 0.0:
        raise ValueError("alkali responsivity vanished; cannot form the equivalent field")
    equivalent = readout / per_unit
    return PseudoTransduction(
        gain=equivalent / drive.amplitude,
        equivalent_field_mg=equivalent,
        readout_amplitude=readout,
        responsivity=per_unit,
    )


def deamplification_suppression(
    model: SystemModel,
    ref_freq: float = 300.0,
    n_grid: int = 6001,
) -> tuple[float, float]:
    """Measured suppression at the interference minimum, from simulation.

    Sweeps a magnetic drive along the optimal azimuth over a window covering
    the interference minimum, normalizes against the ``ref_freq`` response,
    and returns (suppression factor, minimum frequency [Hz]).  Measuring from
    the simulated curve keeps the number valid when the minimum is displaced
    from its small-width asymptote.
    """
    modes = eigenmodes(model)
    nu_b = modes.nu_tilde_b_hz
    eta = amplification_factor(model)
    width_hz = modes.Gamma_tilde_b / TWO_PI
    theta = optimal_theta(model, model.Bz)
    drive = DriveSpec(amplitude=1.0, freq=nu_b, theta=theta, mode="magnetic")

    sign = 1.0 if model.omega_b < 0.0 else -1.0  # minimum side tracks q's sign
    lo = nu_b - sign * (1.6 * eta + 60.0) * width_hz
    hi = nu_b + sign * 20.0 * width_hz
    lo, hi = min(lo, hi), max(lo, hi)
    lo = max(lo, 1e-3)
    nu = np.linspace(lo, hi, n_grid)
    curve = normalize_response(sweep_frequency(model, drive, nu), ref_freq)
    k = int(np.argmin(curve.amplitude))

    # Polish the notch with a bounded scalar search between grid neighbours.
    from scipy.optimize import minimize_scalar

    ref = curve.normalization[0]
    lo_b = curve.axis[max(k - 1, 0)]
    hi_b = curve.axis[min(k + 1, nu.size - 1)]
    res = minimize_scalar(
        lambda x: steady_state(model, drive.at(float(x))).amplitude / ref,
        bounds=(float(lo_b), float(hi_b)), method="bounded",
        options={"xatol": 1e-8 * max(hi_b - lo_b, 1e-6)},
    )
    best = min(float(curve.amplitude[k]), float(res.fun))
    best_nu = float(res.x) if res.fun <= curve.amplitude[k] else float(curve.axis[k])
    if not best > 0.0:
        best = float(np.nextafter(0.0, 1.0))
    return 1.0 / best, best_nu


def sensitivity_report(
    model: SystemModel,
    budget: NoiseBudget,
    operating_point: str,
    eta: float | None = None,
    suppression: float | None = None,
) -> SensitivityReport:
    """Effective field sensitivity at an interference operating point.

    At the amplification point the measured field is boosted by eta before
    detection, so noise that does not interact with the noble gas is divided
    by eta while field-like noise rides along unchanged.  At the
    deamplification point field-like noise is divided by the measured
    suppression factor while readout-chain noise passes through.  Entries
    combine in quadrature.  ``eta`` and ``suppression`` default to the values
    computed from the model (the suppression from the simulated normalized
    curve at the optimal azimuth).
    """
    if operating_point not in ("amplification", "deamplification"):
        raise ValueError(f"unknown operating point {operating_point!r}")

    if operating_point == "amplification":
        if eta is None:
            eta = amplification_factor(model)
        if not eta > 0.0:
            raise ValueError(f"amplification factor must be positive, got {eta}")
        transformed = [
            e.level_ft / eta if e.kind == "non-interacting" else e.level_ft
            for e in budget.entries
        ]
        ratio = eta
    else:
        if suppression is None:
            suppression, _ = deamplification_suppression(model)
        if not suppression > 0.0:
            raise ValueError(f"suppression factor must be positive, got {suppression}")
        transformed = [
            e.level_ft / suppression if e.kind == "field-like" else e.level_ft
            for e in budget.entries
        ]
        ratio = suppression

    effective = math.sqrt(sum(v * v for v in transformed))
    return SensitivityReport(
        operating_point=operating_point,
        effective_sensitivity_ft=effective,
        suppression_or_gain_db=20.0 * math.log10(ratio),
        energy_resolution_ev=effective * ENERGY_PER_FT_EV,
    )
