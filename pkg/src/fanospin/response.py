"""Driven steady-state and time-domain response of the coupled pair.

A transverse field ``B_perp(t) = A*cos(2*pi*nu*t) * (cos(theta), sin(theta))``
drives each species through ``h_s(t) = i*sqrt(gamma_s*M_z^s/2)*(B_x + i*B_y)``;
pseudo-magnetic drives apply the same construction to a single species only.
The linear drive is split evenly between the two rotating components
``e^{-i*omega*t}`` and ``e^{+i*omega*t}`` and each component is solved with a
direct complex 2x2 inversion (no rotating-wave approximation: the asymmetry
of the lineshape depends on the broad alkali background).

The optical readout is the x-magnetization of the alkali,
``sqrt(2*gamma_a*M_z^a) * Re(a(t))``.  Assembling both rotating components
gives a real sinusoid ``Re(C * e^{-i*omega*t})``; curves record both the
complex phasor C and its magnitude (the default amplitude demodulation).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .model import TWO_PI, SystemModel, build_matrix, eigenmodes

DRIVE_MODES = ("magnetic", "pseudo_a", "pseudo_b")


class ResponseError(RuntimeError):
    """Raised when a response computation is numerically degenerate."""


@dataclass(frozen=True)
class DriveSpec:
    """A transverse oscillating drive.

    amplitude [mG], freq = nu [Hz], theta = azimuth in the xy plane [rad]
    (theta = 0 along x), mode one of 'magnetic', 'pseudo_a', 'pseudo_b'.
    """

    amplitude: float
    freq: float
    theta: float = 0.0
    mode: str = "magnetic"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise ValueError(f"amplitude must be finite and >= 0, got {self.amplitude}")
        if not (math.isfinite(self.freq) and self.freq >= 0.0):
            raise ValueError(f"freq must be finite and >= 0, got {self.freq}")
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.mode not in DRIVE_MODES:
            raise ValueError(f"mode must be one of {DRIVE_MODES}, got {self.mode!r}")

    def at(self, freq: float) -> "DriveSpec":
        return replace(self, freq=freq)


@dataclass(frozen=True)
class ReadoutConvention:
    """Optical readout of the alkali transverse excitation.

    The probed component is the alkali x-magnetization; the excitation is
    scaled back to magnetization units by sqrt(2*gamma_a*M_z^a).
    Demodulation is 'amplitude' (|C|, the default) or 'in_phase'
    (Re(C*e^{-i*phase})).
    """

    component: str = "x"
    demodulation: str = "amplitude"
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.component != "x":
            raise ValueError("only the x transverse component is probed")
        if self.demodulation not in ("amplitude", "in_phase"):
            raise ValueError(f"unknown demodulation {self.demodulation!r}")


def readout_scale(model: SystemModel) -> float:
    """sqrt(2*gamma_a*M_z^a): converts alkali excitation to magnetization units."""
    return math.sqrt(2.0 * model.a.gamma * model.a.mz_field / model.lam)


def drive_vector(model: SystemModel, drive: DriveSpec) -> tuple[np.ndarray, np.ndarray]:
    """Source vectors (h_plus, h_minus) for the two rotating components.

    A linear drive along azimuth theta has B_x + i*B_y = A*e^{i*theta} *
    cos(omega*t); each rotating component carries half of it.  Magnetic mode
    populates both species entries; pseudo modes populate one entry only.
    """
    half = 0.5 * drive.amplitude * np.exp(1j * drive.theta)
    lam = model.lam
    ga_m = model.a.gamma * model.a.mz_field / lam
    gb_m = model.b.gamma * model.b.mz_field / lam
    h = np.zeros(2, dtype=complex)
    if drive.mode in ("magnetic", "pseudo_a"):
        h[0] = 1j * math.sqrt(0.5 * ga_m) * half
    if drive.mode in ("magnetic", "pseudo_b"):
        h[1] = 1j * math.sqrt(0.5 * gb_m) * half
    return h, h.copy()


def _solve_components(
    model: SystemModel,
    h_plus: np.ndarray,
    h_minus: np.ndarray,
    omega: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Steady-state (a, b) of both rotating components for an array of omega.

    The e^{-i*omega*t} component solves -i*(omega*I + H) x = h_plus and the
    e^{+i*omega*t} component solves  i*(omega*I - H) x = h_minus, both by the
    closed-form 2x2 inverse, vectorized over omega [rad/s].
    """
    Haa = model.omega_a + 1j * model.a.Gamma
    Hbb = model.omega_b + 1j * model.b.Gamma
    J = model.J
    J2 = J * J
    w = np.asarray(omega, dtype=float)

    det_p = (w + Haa) * (w + Hbb) - J2
    det_m = (w - Haa) * (w - Hbb) - J2
    scale = (abs(Haa) + abs(Hbb) + J2 + np.abs(w) ** 2) + 1e-300
    if np.any(np.abs(det_p) < 1e-14 * scale) or np.any(np.abs(det_m) < 1e-14 * scale):
        raise ResponseError(
            "singular steady-state solve: the drive sits on an undamped pole "
            "(requires Gamma = 0 inputs)"
        )

    a_p = 1j * ((w + Hbb) * h_plus[0] + J * h_plus[1]) / det_p
    b_p = 1j * (J * h_plus[0] + (w + Haa) * h_plus[1]) / det_p
    a_m = -1j * ((w - Hbb) * h_minus[0] - J * h_minus[1]) / det_m
    b_m = -1j * (-J * h_minus[0] + (w - Haa) * h_minus[1]) / det_m
    return a_p, b_p, a_m, b_m


@dataclass(frozen=True)
class SteadyState:
    """Per-component complex amplitudes and the assembled readout at nu.

    The time-dependent excitation is a(t) = a_plus*e^{-i*omega*t} +
    a_minus*e^{+i*omega*t} (same for b).  The readout signal is
    Re(phasor * e^{-i*omega*t}) with phasor = scale*(a_plus + conj(a_minus)),
    so ``amplitude`` = |phasor| is the magnitude of the nu-component of the
    alkali x-magnetization.
    """

    freq_hz: float
    a_plus: complex
    b_plus: complex
    a_minus: complex
    b_minus: complex
    phasor: complex
    amplitude: float

    def demodulated(self, convention: ReadoutConvention = ReadoutConvention()) -> float:
        if convention.demodulation == "amplitude":
            return self.amplitude
        return (self.phasor * np.exp(-1j * convention.phase)).real


def steady_state(model: SystemModel, drive: DriveSpec) -> SteadyState:
    """Driven steady state at the drive frequency."""
    h_p, h_m = drive_vector(model, drive)
    omega = np.array([TWO_PI * drive.freq])
    a_p, b_p, a_m, b_m = _solve_components(model, h_p, h_m, omega)
    phasor = readout_scale(model) * (a_p[0] + np.conj(a_m[0]))
    return SteadyState(
        freq_hz=drive.freq,
        a_plus=complex(a_p[0]),
        b_plus=complex(b_p[0]),
        a_minus=complex(a_m[0]),
        b_minus=complex(b_m[0]),
        phasor=complex(phasor),
        amplitude=float(abs(phasor)),
    )


@dataclass(frozen=True)
class TimeSeries:
    """Sampled complex excitations a(t), b(t) and the real readout."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    readout: np.ndarray


def time_domain(
    model: SystemModel,
    drive: DriveSpec,
    t_end: float,
    dt_out: float,
    x0: tuple[complex, complex] = (0j, 0j),
) -> TimeSeries:
    """Propagate the driven linear system from ``x0``.

    Uses the closed-form propagator from the eigen-decomposition of H plus
    the sinusoidal particular solution, which is exact for this linear model
    (no step-size error).  If H is defective (mode coalescence) the
    eigenvector matrix cannot be inverted and a dense high-order integrator
    with tolerance 1e-10 is used instead.
    """
    if not (t_end > 0.0 and dt_out > 0.0):
        raise ValueError("t_end and dt_out must be positive")
    n = int(math.floor(t_end / dt_out)) + 1
    t = np.arange(n) * dt_out

    omega = TWO_PI * drive.freq
    h_p, h_m = drive_vector(model, drive)
    a_p, b_p, a_m, b_m = _solve_components(model, h_p, h_m, np.array([omega]))
    xp = np.array([a_p[0], b_p[0]])
    xm = np.array([a_m[0], b_m[0]])

    H = build_matrix(model)
    modes = eigenmodes(model)
    lam1, lam2 = modes.lam_plus, modes.lam_minus
    scale = abs(lam1) + abs(lam2) + 1.0

    x0v = np.array(x0, dtype=complex)
    c0 = x0v - (xp + xm)

    if abs(lam1 - lam2) > 1e-8 * scale:
        if model.J == 0.0:
            V = np.eye(2, dtype=complex)
            lams = np.array([H[0, 0], H[1, 1]])
        else:
            V = np.array([[model.J, model.J], [H[0, 0] - lam1, H[0, 0] - lam2]])
            lams = np.array([lam1, lam2])
        coef = np.linalg.solve(V, c0)
        phases = np.exp(1j * np.outer(lams, t))  # (2, n)
        xh = V @ (coef[:, None] * phases)
        osc_p = np.exp(-1j * omega * t)
        x = xh + xp[:, None] * osc_p + xm[:, None] * np.conj(osc_p)
        a, b = x[0], x[1]
    else:
        # Defective H: fall back to a dense high-order integrator.
        def rhs(tt: float, y: np.ndarray) -> np.ndarray:
            drv = h_p * np.exp(-1j * omega * tt) + h_m * np.exp(1j * omega * tt)
            return 1j * (H @ y) + drv

        atol = 1e-12 * (np.abs(xp).sum() + np.abs(xm).sum() + np.abs(x0v).sum() + 1e-30)
        sol = solve_ivp(
            rhs, (0.0, float(t[-1])), x0v, method="DOP853",
            t_eval=t, rtol=1e-10, atol=atol,
        )
        if not sol.success:
            raise ResponseError(f"time-domain integration failed: {sol.message}")
        a, b = sol.y[0], sol.y[1]

    readout = readout_scale(model) * a.real
    return TimeSeries(t=t, a=a, b=b, readout=readout)


@dataclass(frozen=True)
class ResponseCurve:
    """Sampled response along one axis (frequency, theta, or bias field).

    ``amplitude`` is the assembled readout magnitude per sample; the complex
    rotating-component amplitudes and the readout phasor are retained so any
    demodulation quadrature can be recovered.  ``normalization`` records the
    (reference value, reference frequency) pair once normalized.  The
    generating model and drive template are kept so normalization references
    can be computed directly rather than interpolated.
    """

    axis: np.ndarray
    axis_kind: str
    amplitude: np.ndarray
    phasor: np.ndarray
    a_plus: np.ndarray
    b_plus: np.ndarray
    a_minus: np.ndarray
    b_minus: np.ndarray
    normalization: tuple[float, float] | None = None
    model: SystemModel | None = None
    drive: DriveSpec | None = None

    def __post_init__(self) -> None:
        d = np.diff(self.axis)
        if self.axis.size < 2 or not (np.all(d > 0.0) or np.all(d < 0.0)):
            raise ValueError("axis must be strictly monotonic with >= 2 samples")
        if not np.all(np.isfinite(self.amplitude)):
            raise ValueError("response values must be finite")

    @classmethod
    def from_amplitude(cls, axis: np.ndarray, amplitude: np.ndarray,
                       axis_kind: str = "frequency_hz") -> "ResponseCurve":
        """Wrap a bare (axis, amplitude) pair, e.g. synthetic or file data."""
        axis = np.asarray(axis, dtype=float)
        amplitude = np.asarray(amplitude, dtype=float)
        z = np.zeros_like(amplitude, dtype=complex)
        return cls(axis=axis, axis_kind=axis_kind, amplitude=amplitude,
                   phasor=amplitude.astype(complex), a_plus=z, b_plus=z.copy(),
                   a_minus=z.copy(), b_minus=z.copy())


def sweep_frequency(
    model: SystemModel, drive_template: DriveSpec, nu_grid: np.ndarray
) -> ResponseCurve:
    """Steady state on every grid frequency [Hz]; one independent solve each."""
    nu = np.asarray(nu_grid, dtype=float)
    h_p, h_m = drive_vector(model, drive_template)
    a_p, b_p, a_m, b_m = _solve_components(model, h_p, h_m, TWO_PI * nu)
    phasor = readout_scale(model) * (a_p + np.conj(a_m))
    return ResponseCurve(
        axis=nu, axis_kind="frequency_hz",
        amplitude=np.abs(phasor), phasor=phasor,
        a_plus=a_p, b_plus=b_p, a_minus=a_m, b_minus=b_m,
        model=model, drive=drive_template,
    )


def normalize_response(curve: ResponseCurve, ref_freq: float) -> ResponseCurve:
    """Divide a frequency curve by the response at ``ref_freq``.

    The reference is computed directly from the curve's generating model and
    drive (never interpolated).
    """
    if curve.model is None or curve.drive is None:
        raise ValueError("curve carries no generating model/drive; cannot normalize")
    ref = steady_state(curve.model, curve.drive.at(ref_freq)).amplitude
    if not (math.isfinite(ref) and ref > 0.0):
        raise ValueError(f"reference response at {ref_freq} Hz is {ref}; cannot normalize")
    return ResponseCurve(
        axis=curve.axis, axis_kind=curve.axis_kind,
        amplitude=curve.amplitude / ref, phasor=curve.phasor / ref,
        a_plus=curve.a_plus / ref, b_plus=curve.b_plus / ref,
        a_minus=curve.a_minus / ref, b_minus=curve.b_minus / ref,
        normalization=(ref, ref_freq), model=curve.model, drive=curve.drive,
    )


@dataclass(frozen=True)
class ThetaSweep:
    """Per-azimuth minimum of the normalized frequency response."""

    theta: np.ndarray
    min_normalized: np.ndarray
    min_freq_hz: np.ndarray
    ref_freq_hz: float


def sweep_theta(
    model: SystemModel,
    drive_template: DriveSpec,
    theta_grid: np.ndarray,
    nu_grid: np.ndarray,
    ref_freq: float = 300.0,
    refine: bool = True,
) -> ThetaSweep:
    """Minimum normalized response over frequency, for each drive azimuth.

    Each theta's curve is normalized by its own response at ``ref_freq``.
    With ``refine=True`` the grid minimum is polished by a bounded scalar
    search between its neighbouring grid points, so that narrow interference
    notches are located to much better than the grid resolution.
    """
    theta = np.asarray(theta_grid, dtype=float)
    nu = np.asarray(nu_grid, dtype=float)
    omega = TWO_PI * nu
    minima = np.empty(theta.size)
    min_nu = np.empty(theta.size)

    for i, th in enumerate(theta):
        drv = replace(drive_template, theta=float(th))
        h_p, h_m = drive_vector(model, drv)
        ref = steady_state(model, drv.at(ref_freq)).amplitude
        if not (math.isfinite(ref) and ref > 0.0):
            raise ValueError(f"reference response at {ref_freq} Hz is {ref}")
        a_p, _, a_m, _ = _solve_components(model, h_p, h_m, omega)
        amp = np.abs(a_p + np.conj(a_m))  # readout scale cancels in the ratio
        scale = readout_scale(model)
        k = int(np.argmin(amp))
        best_nu, best = float(nu[k]), float(scale * amp[k] / ref)

        if refine and 0 < k < nu.size - 1:
            def objective(x: float) -> float:
                s = steady_state(model, drv.at(x))
                return s.amplitude / ref

            res = minimize_scalar(
                objective, bounds=(float(nu[k - 1]), float(nu[k + 1])),
                method="bounded",
                options={"xatol": max(1e-10, 1e-7 * (nu[k + 1] - nu[k - 1]))},
            )
            if res.fun < best:
                best, best_nu = float(res.fun), float(res.x)
        minima[i] = best
        min_nu[i] = best_nu

    return ThetaSweep(theta=theta, min_normalized=minima, min_freq_hz=min_nu,
                      ref_freq_hz=ref_freq)
