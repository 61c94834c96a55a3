"""Fano lineshape evaluation and fitting, and the derived interference observables.

The power spectral response of the alkali readout near the dressed noble-gas
resonance follows

    F(eps) = A*(q + eps)**2 / (1 + eps**2) + B,
    eps = 2*pi*(nu - center) / width,

with asymmetry parameter q, center = dressed noble-gas frequency [Hz] and
width = dressed noble-gas decay rate [rad/s].  The local background scales A
and B vary slowly on the width scale and are fit as constants.

Fitting operates on the power (squared-amplitude) response with relative
residuals: the readout noise is multiplicative and the peak-to-trough
dynamic range grows like q**4, so uniform weights would let the peak drown
the interference minimum that carries most of the q information.  The
optimizer is a damped Gauss-Newton loop with the analytic Jacobian of F:
five smooth parameters with a deterministic initializer need no global
search.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .model import TWO_PI, SystemModel, eigenmodes
from .response import ResponseCurve


@dataclass(frozen=True)
class FanoProfile:
    """Parameters of the interference lineshape.

    q dimensionless, center [Hz], width [rad/s], scale_a and offset_b in
    squared-response units.
    """

    q: float
    center: float
    width: float
    scale_a: float
    offset_b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise ValueError(f"width must be finite and > 0, got {self.width}")
        if self.scale_a < 0.0:
            raise ValueError(f"scale_a must be >= 0, got {self.scale_a}")


@dataclass(frozen=True)
class FanoFit:
    """Least-squares fit result with residual and covariance diagnostics.

    ``residual_norm`` is the root-mean-square relative residual of the power
    fit; ``covariance`` the linearized 5x5 estimate in parameter order
    (q, center, width, scale_a, offset_b).
    """

    profile: FanoProfile
    residual_norm: float
    covariance: np.ndarray
    iterations: int
    converged: bool


def eval_fano(profile: FanoProfile, nu: np.ndarray | float) -> np.ndarray | float:
    """Power response F at frequency nu [Hz]."""
    eps = TWO_PI * (np.asarray(nu, dtype=float) - profile.center) / profile.width
    out = profile.scale_a * (profile.q + eps) ** 2 / (1.0 + eps**2) + profile.offset_b
    return float(out) if np.isscalar(nu) else out


def _model_and_jacobian(p: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, center, width, A, B = p
    eps = TWO_PI * (nu - center) / width
    den = 1.0 + eps**2
    shape = (q + eps) ** 2 / den
    F = A * shape + B
    dF_deps = 2.0 * A * (q + eps) * (1.0 - q * eps) / den**2
    Jm = np.empty((nu.size, 5))
    Jm[:, 0] = 2.0 * A * (q + eps) / den
    Jm[:, 1] = dF_deps * (-TWO_PI / width)
    Jm[:, 2] = dF_deps * (-eps / width)
    Jm[:, 3] = shape
    Jm[:, 4] = 1.0
    return F, Jm


def _peak_fwhm(nu: np.ndarray, power: np.ndarray, i_pk: int, floor: float) -> float:
    """Full width of the resonance peak at half height above ``floor``."""
    half = floor + 0.5 * (power[i_pk] - floor)
    left = right = float(nu[i_pk])
    for i in range(i_pk, 0, -1):
        if power[i - 1] <= half:
            f = (power[i] - half) / max(power[i] - power[i - 1], 1e-300)
            left = float(nu[i] - f * (nu[i] - nu[i - 1]))
            break
    else:
        left = float(nu[0])
    for i in range(i_pk, nu.size - 1):
        if power[i + 1] <= half:
            f = (power[i] - half) / max(power[i] - power[i + 1], 1e-300)
            right = float(nu[i] + f * (nu[i + 1] - nu[i]))
            break
    else:
        right = float(nu[-1])
    return max(right - left, float(np.min(np.abs(np.diff(nu)))))


def _initial_profiles(nu: np.ndarray, power: np.ndarray) -> list[np.ndarray]:
    """Candidate deterministic initializers from the curve geometry.

    Sharp-asymmetry estimate: width from the half-height width of the
    resonance peak (the interference core has half-width one in eps), |q|
    from the peak-to-trough spacing (q + 1/q)*width/(2*pi), sign of q from
    which side the trough sits on, scales from the peak and trough levels.
    A second candidate estimates the scales from the baseline instead, which
    is better conditioned for order-one q; the optimizer starts from the
    candidate with the lowest initial cost.
    """
    i_pk = int(np.argmax(power))
    i_tr = int(np.argmin(power))
    peak, trough = float(power[i_pk]), float(power[i_tr])
    sign = 1.0 if nu[i_tr] < nu[i_pk] else -1.0
    spacing = abs(float(nu[i_pk] - nu[i_tr]))
    if spacing <= 0.0:
        spacing = (nu[-1] - nu[0]) / 10.0
    slope = np.gradient(power, nu)
    center_slope = float(nu[int(np.argmax(np.abs(slope)))])

    candidates: list[np.ndarray] = []

    # Sharp peak: FWHM-based width, spacing-based q.
    width_a = math.pi * _peak_fwhm(nu, power, i_pk, trough)
    s = math.pi * spacing / width_a  # = (q + 1/q)/2
    q_a = sign * (s + math.sqrt(max(s * s - 1.0, 0.0)))
    if abs(q_a) < 1e-3:
        q_a = sign * 1e-3
    A_a = max((peak - trough) / (q_a * q_a + 1.0), 1e-300)
    center_a = float(nu[i_pk]) - width_a / (TWO_PI * q_a)
    candidates.append(np.array([q_a, center_a, width_a, A_a, trough]))

    # Order-one q: scales from the edge baseline.
    edge = max(8, nu.size // 20)
    baseline = float(np.median(np.concatenate([power[:edge], power[-edge:]])))
    A_b = max(baseline - trough, 1e-12 * max(peak - trough, 1.0))
    q_b = sign * max(math.sqrt(max(peak - trough, 0.0) / A_b), 1e-3)
    width_b = TWO_PI * spacing / (abs(q_b) + 1.0 / abs(q_b))
    candidates.append(np.array([q_b, center_slope, width_b, A_b, trough]))
    return candidates


def _canonical(q: float, A: float, B: float) -> tuple[float, float, float]:
    """Equivalent (q, A, B) with A >= 0.

    The numerator A*(q+eps)**2 + B*(1+eps**2) is a quadratic in eps; the two
    representations (q, A) and (q', A*q/q') with q' the conjugate root of
    q'**2 - q'*(q**2-1)/q - 1 = 0 describe the same profile, and the roots
    have opposite signs, so one always carries a nonnegative scale.
    """
    if A >= 0.0 or q == 0.0:
        return q, A, B
    s = 0.5 * (q * q - 1.0) / q
    r = math.sqrt(s * s + 1.0)
    q_new = s + r if (s + r) * q < 0.0 else s - r
    A_new = A * q / q_new
    return q_new, A_new, A + B - A_new


def fit_fano(
    curve: ResponseCurve,
    init: FanoProfile | None = None,
    max_iter: int = 200,
    rtol: float = 1e-8,
) -> FanoFit:
    """Fit the five-parameter lineshape to a response curve.

    The curve's amplitude values are squared to form the power response.
    Requires at least 8 samples spanning a few widths around the resonance.
    A fit that exhausts ``max_iter`` without meeting the relative parameter
    tolerance is returned with ``converged=False``.
    """
    nu = np.asarray(curve.axis, dtype=float)
    power = np.asarray(curve.amplitude, dtype=float) ** 2
    if nu.size < 8:
        raise ValueError(f"need at least 8 samples to fit, got {nu.size}")
    span = power.max() - power.min()
    if not span > 0.0 or span < 1e-12 * abs(power.max()):
        raise ValueError("degenerate flat curve; nothing to fit")

    if init is not None:
        starts = [np.array([init.q, init.center, init.width, init.scale_a, init.offset_b])]
    else:
        starts = _initial_profiles(nu, power)

    # Relative residuals with a floor: the floor keeps near-zero interference
    # minima (where no model fits to machine precision) from dominating.
    sigma = power + 1e-4 * float(power.max())

    def initial_cost(p0: np.ndarray) -> float:
        F0, _ = _model_and_jacobian(p0, nu)
        return float(np.sum(((F0 - power) / sigma) ** 2))

    starts.sort(key=initial_cost)

    best: tuple[float, np.ndarray, np.ndarray, int, bool] | None = None
    for p0 in starts:
        p, Jm, cost, iterations, converged = _levenberg_marquardt(
            p0, nu, power, sigma, max_iter=max_iter, rtol=rtol
        )
        if best is None or cost < best[0]:
            best = (cost, p, Jm, iterations, converged)
        if converged and cost <= 1e-16 * nu.size:  # exact-data fit, done
            break
    cost, p, Jm, iterations, converged = best  # type: ignore[misc]

    dof = max(nu.size - 5, 1)
    sigma2 = cost / dof
    try:
        cov = sigma2 * np.linalg.inv(Jm.T @ Jm)
    except np.linalg.LinAlgError:
        cov = np.full((5, 5), np.nan)

    q, A, B = _canonical(float(p[0]), float(p[3]), float(p[4]))
    profile = FanoProfile(q=q, center=float(p[1]), width=float(p[2]),
                          scale_a=A, offset_b=B)
    return FanoFit(
        profile=profile,
        residual_norm=float(math.sqrt(cost / nu.size)),
        covariance=cov,
        iterations=iterations,
        converged=converged,
    )


def _levenberg_marquardt(
    p0: np.ndarray, nu: np.ndarray, power: np.ndarray, sigma: np.ndarray,
    max_iter: int, rtol: float
) -> tuple[np.ndarray, np.ndarray, float, int, bool]:
    """Damped Gauss-Newton descent on the 5-parameter lineshape."""

    def weighted(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        F, Jm = _model_and_jacobian(p, nu)
        r = (F - power) / sigma
        return r, Jm / sigma[:, None], float(r @ r)

    p = p0.copy()
    lam = 1e-3
    r, Jm, cost = weighted(p)
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        JtJ = Jm.T @ Jm
        g = Jm.T @ r
        diag = np.diag(JtJ).copy()
        diag[diag <= 0.0] = 1.0
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(JtJ + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = p + step
            if p_new[2] <= 0.0:  # width must stay positive
                lam *= 10.0
                continue
            r_new, J_new, cost_new = weighted(p_new)
            if cost_new <= cost:
                rel = np.max(np.abs(step) / (np.abs(p_new) + 1e-300))
                p, r, Jm, cost = p_new, r_new, J_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if rel < rtol:
                    converged = True
                break
            lam *= 10.0
        if converged or not accepted:
            break
    return p, Jm, cost, iterations, converged


def amplification_factor(model: SystemModel) -> float:
    """On-resonance interference gain eta = gamma_b*m_b / (2*Gamma_tilde_b).

    Gamma_tilde_b is the dressed noble-gas decay rate; eta matches the
    fitted Fano q at the dressed resonance.
    """
    Gtb = eigenmodes(model).Gamma_tilde_b
    if not Gtb > 0.0:
        raise ValueError(f"dressed noble-gas rate must be positive, got {Gtb}")
    return model.b.gamma * model.b.mz_field / (2.0 * Gtb)


def deamplification_point(profile: FanoProfile) -> float:
    """Frequency of the interference minimum, center - q*width/(2*pi) [Hz].

    The minimum sits at eps = -q, shifted from the dressed resonance by
    q*width/(2*pi) on the side opposite to the sign of q.
    """
    return profile.center - profile.q * profile.width / TWO_PI


def amp_deamp_separation(model: SystemModel) -> float:
    """Frequency distance between amplification and deamplification points.

    Closed form gamma_b*m_b/(4*pi) [Hz]: the product of the gain eta and the
    dressed linewidth is independent of the bias field, so the separation
    stays constant as the resonance is tuned.
    """
    return model.b.gamma * model.b.mz_field / (4.0 * math.pi)
