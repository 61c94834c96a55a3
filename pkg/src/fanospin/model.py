"""Linear model of two coupled spin-excitation modes.

A polarized alkali-metal vapor (broad resonance, optically read out) and a
noble-gas nuclear ensemble (narrow resonance) exchange transverse excitation
through contact collisions.  The transverse excitations ``(a, b)`` obey

    d/dt (a, b)^T = i H (a, b)^T + (h_a, h_b)^T,

with the non-Hermitian matrix

    H = [[omega_a + i*Gamma_a, -J],
         [-J,                  omega_b + i*Gamma_b]].

Each species precesses at ``omega_s = gamma_s * (B_z + <partner contact
field>)`` and the bidirectional coupling is ``J = sqrt(gamma_a * gamma_b *
m_a * m_b)`` where ``m_s`` is the contact field produced by species ``s``.

Unit conventions (used consistently by every module in this package):

* angular frequencies and decay rates in rad/s,
* magnetic fields in mG,
* gyromagnetic ratios in rad s^-1 mG^-1,
* longitudinal magnetizations stored as the effective contact field
  ``lambda * M_z`` [mG] they impose on the partner species.  The raw
  magnetization is recoverable as ``mz_field / lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Raised for physically inconsistent model parameters."""


@dataclass(frozen=True)
class EnsembleParams:
    """One spin species.

    Parameters
    ----------
    gamma : float
        Signed gyromagnetic ratio [rad s^-1 mG^-1].
    Gamma : float
        Bare transverse decoherence rate [rad/s], > 0.
    mz_field : float
        Equilibrium longitudinal magnetization expressed as the effective
        contact field ``lambda * M_z`` [mG] felt by the partner species.
    """

    gamma: float
    Gamma: float
    mz_field: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma != 0.0):
            raise ConfigurationError(f"gamma must be finite and nonzero, got {self.gamma}")
        if not (math.isfinite(self.Gamma) and self.Gamma > 0.0):
            raise ConfigurationError(f"Gamma must be finite and > 0, got {self.Gamma}")
        if not math.isfinite(self.mz_field):
            raise ConfigurationError(f"mz_field must be finite, got {self.mz_field}")


@dataclass(frozen=True)
class SystemModel:
    """The coupled pair: alkali ensemble ``a``, noble-gas ensemble ``b``.

    ``kappa0`` is the dimensionless contact-enhancement factor; the field
    per unit magnetization is ``lam = 8*pi*kappa0/3`` exactly.  ``Bz`` is
    the static bias field [mG].
    """

    a: EnsembleParams
    b: EnsembleParams
    kappa0: float
    Bz: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa0) and self.kappa0 > 0.0):
            raise ConfigurationError(f"kappa0 must be finite and > 0, got {self.kappa0}")
        if not math.isfinite(self.Bz):
            raise ConfigurationError(f"Bz must be finite, got {self.Bz}")
        radicand = self.a.gamma * self.b.gamma * self.a.mz_field * self.b.mz_field
        if radicand < 0.0:
            raise ConfigurationError(
                "inconsistent magnetization/gyromagnetic signs: "
                f"gamma_a*gamma_b*m_a*m_b = {radicand} < 0 gives an imaginary coupling"
            )

    @property
    def lam(self) -> float:
        """Contact field per unit magnetization, 8*pi*kappa0/3."""
        return 8.0 * math.pi * self.kappa0 / 3.0

    @property
    def omega_a(self) -> float:
        """Alkali Larmor frequency gamma_a*(Bz + m_b) [rad/s]."""
        return self.a.gamma * (self.Bz + self.b.mz_field)

    @property
    def omega_b(self) -> float:
        """Noble-gas Larmor frequency gamma_b*(Bz + m_a) [rad/s]."""
        return self.b.gamma * (self.Bz + self.a.mz_field)

    @property
    def J(self) -> float:
        """Bidirectional coupling sqrt(gamma_a*gamma_b*m_a*m_b) [rad/s]."""
        return math.sqrt(self.a.gamma * self.b.gamma * self.a.mz_field * self.b.mz_field)

    def with_bz(self, Bz: float) -> "SystemModel":
        """Copy of the model at a different bias field."""
        return replace(self, Bz=Bz)


@dataclass(frozen=True)
class EigenModes:
    """Complex eigenvalues of H and the scalars they are built from.

    ``lam_plus`` connects continuously to the bare alkali mode
    ``omega_a + i*Gamma_a`` as J -> 0; ``lam_minus`` to the noble-gas mode.
    All entries in rad/s.
    """

    omega0: float
    chi: float
    delta: float
    beta: float
    lam_plus: complex
    lam_minus: complex

    @property
    def omega_tilde_a(self) -> float:
        return self.lam_plus.real

    @property
    def omega_tilde_b(self) -> float:
        return self.lam_minus.real

    @property
    def Gamma_tilde_a(self) -> float:
        return self.lam_plus.imag

    @property
    def Gamma_tilde_b(self) -> float:
        return self.lam_minus.imag

    @property
    def nu_tilde_b_hz(self) -> float:
        """Dressed noble-gas resonance as a (positive) drive frequency [Hz]."""
        return abs(self.lam_minus.real) / TWO_PI


def build_matrix(model: SystemModel) -> np.ndarray:
    """2x2 complex dynamics matrix H of the coupled pair."""
    J = model.J
    return np.array(
        [
            [model.omega_a + 1j * model.a.Gamma, -J],
            [-J, model.omega_b + 1j * model.b.Gamma],
        ],
        dtype=complex,
    )


def _branch_sqrt(J: float, Gam: complex) -> complex:
    """Square root of J**2 + Gam**2 on the branch that equals Gam at J=0.

    The two eigenvalues are omega0 + i*chi +/- sqrt(J**2 + Gam**2) with
    Gam = delta + i*beta.  Selecting the root in the half-plane of Gam keeps
    the labels attached to the bare modes as the coupling is switched on.
    Exactly at a mode coalescence (or when the root is orthogonal to Gam,
    where the labels are no longer meaningful) the principal root is kept.
    """
    w = complex(np.sqrt(complex(J * J + Gam * Gam)))
    if (w * Gam.conjugate()).real < 0.0:
        return -w
    return w


def _modes_from_scalars(
    omega0: float, chi: float, delta: float, beta: float, J: float
) -> EigenModes:
    Gam = complex(delta, beta)
    w = Gam if J == 0.0 else _branch_sqrt(J, Gam)
    center = complex(omega0, chi)
    return EigenModes(
        omega0=omega0,
        chi=chi,
        delta=delta,
        beta=beta,
        lam_plus=center + w,
        lam_minus=center - w,
    )


def eigenmodes(model: SystemModel) -> EigenModes:
    """Closed-form complex eigenvalues of the dynamics matrix.

    Returns omega0 + i*chi +/- sqrt(J**2 + Gam**2) with Gam = delta + i*beta,
    branch-labelled so that ``lam_plus`` is the alkali-like mode.
    """
    wa, wb = model.omega_a, model.omega_b
    Ga, Gb = model.a.Gamma, model.b.Gamma
    if model.J == 0.0:
        # bare modes, exactly
        return EigenModes(
            omega0=0.5 * (wa + wb), chi=0.5 * (Ga + Gb),
            delta=0.5 * (wa - wb), beta=0.5 * (Ga - Gb),
            lam_plus=complex(wa, Ga), lam_minus=complex(wb, Gb),
        )
    return _modes_from_scalars(
        omega0=0.5 * (wa + wb),
        chi=0.5 * (Ga + Gb),
        delta=0.5 * (wa - wb),
        beta=0.5 * (Ga - Gb),
        J=model.J,
    )


def strong_damping_field(model: SystemModel) -> float:
    """Bias field where the two Larmor frequencies match (delta = 0) [mG].

    There the noble-gas precession is maximally damped by the alkali bath.
    """
    ga, gb = model.a.gamma, model.b.gamma
    if ga == gb:
        raise ConfigurationError("strong-damping field undefined for identical gyromagnetic ratios")
    return (gb * model.a.mz_field - ga * model.b.mz_field) / (ga - gb)


def self_compensation_field(model: SystemModel) -> float:
    """Bias field -(m_a + m_b) [mG] cancelling the total contact field.

    At this operating point the response to a transverse drive is suppressed
    for every drive azimuth.
    """
    return -(model.a.mz_field + model.b.mz_field)


def delta_to_bz(model: SystemModel, delta: float) -> float:
    """Bias field at which the frequency half-detuning equals ``delta``."""
    ga, gb = model.a.gamma, model.b.gamma
    if ga == gb:
        raise ConfigurationError("detuning cannot be tuned with identical gyromagnetic ratios")
    return (2.0 * delta - ga * model.b.mz_field + gb * model.a.mz_field) / (ga - gb)


@dataclass(frozen=True)
class EpMetrics:
    """Eigenvalue splitting versus detuning around the mode-coalescence point.

    ``splitting`` is the real (frequency) separation |Re lam_+ - Re lam_-|
    [rad/s]; ``enhancement`` is the square-root gain sqrt(beta/|delta|) of
    the splitting response relative to a linear crossing.
    """

    delta: np.ndarray
    bz: np.ndarray
    splitting: np.ndarray
    enhancement: np.ndarray
    reachable: bool
    note: str
    model: SystemModel


def ep_metrics(
    model: SystemModel, delta_values: np.ndarray, retune: bool = True
) -> EpMetrics:
    """Frequency splitting of the two modes near the coalescence J = beta.

    With ``retune=True`` (default) the alkali decay rate is rescaled to
    ``Gamma_a = 2*J + Gamma_b`` so that beta equals J exactly, and the bias
    field is swept to realize each requested half-detuning.  The coalescence
    is applied algebraically, so the ``delta = 0`` row reports a splitting of
    exactly zero.  Near the degeneracy the splitting grows as
    ``2*sqrt(beta*|delta|)``, i.e. with log-log slope 1/2.

    With ``retune=False`` the model is analyzed as-is; if J/beta is far from
    one the degeneracy is not reachable and the metrics carry a diagnostic
    note (splitting then never closes).
    """
    delta_values = np.asarray(delta_values, dtype=float)
    J = model.J

    if retune:
        if J <= 0.0:
            raise ConfigurationError("cannot retune to the coalescence with zero coupling")
        tuned = replace(model, a=replace(model.a, Gamma=2.0 * J + model.b.Gamma))
        beta = J  # enforced identity, applied algebraically below
        chi = J + model.b.Gamma
        bz = np.array([delta_to_bz(tuned, d) for d in delta_values])
        # w**2 = J**2 + (delta + i*beta)**2 with beta = J reduces to
        # delta*(delta + 2i*beta), which vanishes identically at delta = 0.
        w = np.sqrt(delta_values.astype(complex) * (delta_values + 2j * beta))
        splitting = 2.0 * np.abs(w.real)
        reachable = True
        note = "coalescence enforced by rescaling Gamma_a to 2*J + Gamma_b"
        out_model = tuned.with_bz(delta_to_bz(tuned, 0.0))
    else:
        beta = 0.5 * (model.a.Gamma - model.b.Gamma)
        chi = 0.5 * (model.a.Gamma + model.b.Gamma)
        ratio = J / beta if beta != 0.0 else math.inf
        bz = np.array([delta_to_bz(model, d) for d in delta_values])
        mods = [eigenmodes(model.with_bz(b)) for b in bz]
        splitting = np.array([abs(m.lam_plus.real - m.lam_minus.real) for m in mods])
        reachable = abs(ratio - 1.0) < 1e-9
        note = (
            "" if reachable
            else f"EP unreachable: J/beta = {ratio:.3e}, mode coalescence requires J/beta = 1"
        )
        out_model = model

    with np.errstate(divide="ignore"):
        enhancement = np.sqrt(np.where(delta_values != 0.0, beta / np.abs(delta_values), np.inf))
    return EpMetrics(
        delta=delta_values,
        bz=bz,
        splitting=splitting,
        enhancement=enhancement,
        reachable=reachable,
        note=note,
        model=out_model,
    )


def splitting_slope(metrics: EpMetrics) -> float:
    """Log-log slope of splitting versus |delta|, excluding delta = 0."""
    mask = (metrics.delta != 0.0) & (metrics.splitting > 0.0)
    if np.count_nonzero(mask) < 2:
        raise ValueError("need at least two nonzero-detuning points for a slope fit")
    x = np.log(np.abs(metrics.delta[mask]))
    y = np.log(metrics.splitting[mask])
    return float(np.polyfit(x, y, 1)[0])
