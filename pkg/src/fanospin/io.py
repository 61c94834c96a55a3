"""Command orchestration and deterministic result serialization.

Every command writes a CSV payload (header row with units, one row per grid
point, decimal text at 17 significant digits) and a JSON summary (fitted
parameters and derived scalars, plus the full resolved config echo).  Output
formatting is fixed, so identical configs produce byte-identical CSVs.
Files are written to temporary names and renamed at the end of the run, so a
failing command leaves no partial outputs behind.
"""

from __future__ import annotations

import csv
import datetime
import json
import os
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import __version__
from .model import TWO_PI, eigenmodes, self_compensation_field, strong_damping_field
from .response import ResponseCurve, normalize_response, steady_state, \
    sweep_frequency, sweep_theta, time_domain
from .fano import FanoFit, FanoProfile, amp_deamp_separation, amplification_factor, \
    deamplification_point, eval_fano, fit_fano
from .sensing import decoherence_vs_field, deamplification_suppression, \
    optimal_theta, sensitivity_report
from .config import ConfigError, RunConfig

COMMANDS = (
    "eigen", "sweep-freq", "sweep-theta", "sweep-field", "fit",
    "decoherence", "budget", "integrate",
)


class CommandError(RuntimeError):
    """A command failed; partial outputs have been removed."""


@dataclass(frozen=True)
class ResultEnvelope:
    command: str
    toolkit_version: str
    timestamp_utc: str
    config: dict[str, Any]
    outputs: dict[str, str]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path: str, header: list[str], columns: list[np.ndarray]) -> None:
    """Full-precision decimal CSV; chosen over binary for diffability."""
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("all CSV columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in columns) + "\n")


def read_csv(path: str) -> tuple[list[str], dict[str, np.ndarray]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float)
    if data.size == 0:
        raise ValueError(f"CSV {path!r} has no data rows")
    return header, {name: data[:, j] for j, name in enumerate(header)}


def emit_plotdata(obj: ResponseCurve | tuple[FanoFit, ResponseCurve], path: str) -> None:
    """Write plot-ready CSV data for a curve, or for a fit over a curve.

    For a fit, the fitted lineshape is evaluated on a grid 10x denser than
    the data and wide enough to contain both analytic extrema.
    """
    if isinstance(obj, ResponseCurve):
        curve = obj
        if curve.axis.size == 0:
            raise ValueError("cannot emit an empty curve")
        write_csv(path, [curve.axis_kind, "amplitude", "phasor_re", "phasor_im"],
                  [curve.axis, curve.amplitude, curve.phasor.real, curve.phasor.imag])
        return
    fit, curve = obj
    if curve.axis.size == 0:
        raise ValueError("cannot emit an empty curve")
    prof = fit.profile
    w_hz = prof.width / TWO_PI
    nu_min = deamplification_point(prof)
    nu_max = prof.center + w_hz / prof.q if prof.q != 0.0 else prof.center
    lo = min(curve.axis.min(), nu_min - 5 * w_hz, nu_max - 5 * w_hz)
    hi = max(curve.axis.max(), nu_min + 5 * w_hz, nu_max + 5 * w_hz)
    dense = np.linspace(lo, hi, 10 * curve.axis.size)
    power = eval_fano(prof, dense)
    write_csv(path, ["frequency_hz", "fano_power", "fano_amplitude"],
              [dense, power, np.sqrt(np.clip(power, 0.0, None))])


def _profile_dict(profile: FanoProfile) -> dict[str, float]:
    return {
        "q": profile.q,
        "center_hz": profile.center,
        "width_rad_s": profile.width,
        "scale_a": profile.scale_a,
        "offset_b": profile.offset_b,
    }


def _fit_summary(fit: FanoFit) -> dict[str, Any]:
    return {
        **_profile_dict(fit.profile),
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "deamplification_point_hz": deamplification_point(fit.profile),
        "covariance_diag": [float(v) for v in np.diag(fit.covariance)],
    }


def _run_eigen(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    modes = eigenmodes(model)
    bsd = strong_damping_field(model)
    bsc = self_compensation_field(model)
    eta = amplification_factor(model)
    header = [
        "omega0_rad_s", "chi_rad_s", "delta_rad_s", "beta_rad_s",
        "lam_plus_re_rad_s", "lam_plus_im_rad_s", "lam_minus_re_rad_s", "lam_minus_im_rad_s",
        "nu_tilde_b_hz", "J_rad_s", "strong_damping_field_mg", "self_compensation_field_mg",
        "eta", "optimal_theta_rad",
    ]
    row = [modes.omega0, modes.chi, modes.delta, modes.beta,
           modes.lam_plus.real, modes.lam_plus.imag, modes.lam_minus.real, modes.lam_minus.imag,
           modes.nu_tilde_b_hz, model.J, bsd, bsc, eta, optimal_theta(model, model.Bz)]
    write_csv(paths["csv"], header, [np.array([v]) for v in row])
    return dict(zip(header, [float(v) for v in row]))


def _run_sweep_freq(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    drive = cfg.drive()
    curve = sweep_frequency(model, drive, cfg.freq_grid())
    normalized = normalize_response(curve, cfg.ref_freq)
    header = ["nu_hz", "amplitude", "amplitude_normalized", "phasor_re", "phasor_im",
              "a_plus_re", "a_plus_im", "b_plus_re", "b_plus_im",
              "a_minus_re", "a_minus_im", "b_minus_re", "b_minus_im"]
    cols = [curve.axis, curve.amplitude, normalized.amplitude,
            curve.phasor.real, curve.phasor.imag,
            curve.a_plus.real, curve.a_plus.imag, curve.b_plus.real, curve.b_plus.imag,
            curve.a_minus.real, curve.a_minus.imag, curve.b_minus.real, curve.b_minus.imag]
    write_csv(paths["csv"], header, cols)
    modes = eigenmodes(model)
    return {
        "nu_tilde_b_hz": modes.nu_tilde_b_hz,
        "Gamma_tilde_b_rad_s": modes.Gamma_tilde_b,
        "eta": amplification_factor(model),
        "normalization_ref_hz": cfg.ref_freq,
        "normalization_ref_value": normalized.normalization[0],
    }


def _run_sweep_theta(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    drive = cfg.drive()
    sweep = sweep_theta(model, drive, cfg.theta_grid(), cfg.freq_grid(), cfg.ref_freq)
    write_csv(paths["csv"], ["theta_rad", "min_normalized", "min_freq_hz"],
              [sweep.theta, sweep.min_normalized, sweep.min_freq_hz])
    k = int(np.argmin(sweep.min_normalized))
    return {
        "argmin_theta_rad": float(sweep.theta[k]),
        "deepest_min_normalized": float(sweep.min_normalized[k]),
        "optimal_theta_formula_rad": optimal_theta(model, model.Bz),
        "ref_freq_hz": sweep.ref_freq_hz,
    }


def _run_sweep_field(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    bz = cfg.field_grid()
    modes = [eigenmodes(model.with_bz(b)) for b in bz]
    cols = [bz,
            np.array([m.lam_plus.real for m in modes]),
            np.array([m.lam_plus.imag for m in modes]),
            np.array([m.lam_minus.real for m in modes]),
            np.array([m.lam_minus.imag for m in modes]),
            np.array([1.0 / m.Gamma_tilde_b for m in modes])]
    write_csv(paths["csv"],
              ["bz_mg", "lam_plus_re_rad_s", "lam_plus_im_rad_s",
               "lam_minus_re_rad_s", "lam_minus_im_rad_s", "decoherence_time_s"],
              cols)
    return {
        "strong_damping_field_mg": strong_damping_field(model),
        "self_compensation_field_mg": self_compensation_field(model),
    }


def _run_decoherence(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    gradient = cfg.gradient()
    bz = cfg.field_grid()
    with_grad = decoherence_vs_field(model, bz, gradient)
    no_grad = decoherence_vs_field(model, bz, replace(gradient, enabled=False))
    write_csv(paths["csv"],
              ["bz_mg", "rate_rad_s", "time_s", "rate_no_gradient_rad_s", "time_no_gradient_s"],
              [bz, with_grad.rate, with_grad.time_s, no_grad.rate, no_grad.time_s])
    k_min = int(np.argmin(with_grad.time_s))
    k_max = int(np.argmax(with_grad.time_s))
    return {
        "min_time_s": float(with_grad.time_s[k_min]),
        "min_time_bz_mg": float(bz[k_min]),
        "max_time_s": float(with_grad.time_s[k_max]),
        "max_time_bz_mg": float(bz[k_max]),
        "gradient_enabled": gradient.enabled,
        "epsilon_g": gradient.epsilon_g,
        "tau_c_s": gradient.tau_c,
    }


def _run_fit(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    source = cfg.resolved["fit"]["input_csv"]
    column = cfg.resolved["fit"]["column"]
    if not source:
        raise CommandError("fit requires fit.input_csv pointing at a sweep-freq payload")
    header, data = read_csv(source)
    if "nu_hz" not in data or column not in data:
        raise CommandError(f"input CSV must contain 'nu_hz' and {column!r} columns")
    curve = ResponseCurve.from_amplitude(data["nu_hz"], data[column])
    fit = fit_fano(curve)
    emit_plotdata((fit, curve), paths["csv"])
    model = cfg.model()
    return {
        **_fit_summary(fit),
        "input_csv": source,
        "column": column,
        "eta_model": amplification_factor(model),
        "amp_deamp_separation_hz": amp_deamp_separation(model),
    }


def _run_budget(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    budget = cfg.budget()
    point = cfg.resolved["budget"]["operating_point"]
    report = sensitivity_report(model, budget, point)
    write_csv(paths["csv"],
              ["effective_sensitivity_ft", "suppression_or_gain_db", "energy_resolution_ev"],
              [np.array([report.effective_sensitivity_ft]),
               np.array([report.suppression_or_gain_db]),
               np.array([report.energy_resolution_ev])])
    out: dict[str, Any] = {
        "operating_point": point,
        "effective_sensitivity_ft": report.effective_sensitivity_ft,
        "suppression_or_gain_db": report.suppression_or_gain_db,
        "energy_resolution_ev": report.energy_resolution_ev,
        "entries": [
            {"name": e.name, "level_ft": e.level_ft, "kind": e.kind} for e in budget.entries
        ],
    }
    if point == "amplification":
        out["eta"] = amplification_factor(model)
    else:
        suppression, nu_min = deamplification_suppression(model, cfg.ref_freq)
        out["suppression"] = suppression
        out["deamplification_freq_hz"] = nu_min
    return out


def _run_integrate(cfg: RunConfig, paths: dict[str, str]) -> dict[str, Any]:
    model = cfg.model()
    block = cfg.resolved["integrate"]
    drive = cfg.drive(freq=float(block["drive_freq_hz"]))
    x0 = (complex(block["a0"][0], block["a0"][1]), complex(block["b0"][0], block["b0"][1]))
    series = time_domain(model, drive, float(block["t_end_s"]), float(block["dt_out_s"]), x0)
    write_csv(paths["csv"], ["t_s", "a_re", "a_im", "b_re", "b_im", "readout"],
              [series.t, series.a.real, series.a.imag, series.b.real, series.b.imag,
               series.readout])
    ss = steady_state(model, drive)
    return {
        "t_end_s": float(block["t_end_s"]),
        "dt_out_s": float(block["dt_out_s"]),
        "drive_freq_hz": drive.freq,
        "samples": int(series.t.size),
        "steady_state_amplitude": ss.amplitude,
    }


_RUNNERS = {
    "eigen": _run_eigen,
    "sweep-freq": _run_sweep_freq,
    "sweep-theta": _run_sweep_theta,
    "sweep-field": _run_sweep_field,
    "fit": _run_fit,
    "decoherence": _run_decoherence,
    "budget": _run_budget,
    "integrate": _run_integrate,
}


def run_command(name: str, cfg: RunConfig) -> ResultEnvelope:
    """Execute a named command; write its CSV payload and JSON summary.

    Outputs land in the config's output directory as <name>.csv and
    <name>_summary.json.  Failures surface as CommandError with the command
    context, after removing any partially written files.
    """
    if name not in _RUNNERS:
        raise CommandError(f"unknown command {name!r}; choose from {COMMANDS}")
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    stem = name.replace("-", "_")
    final = {
        "csv": os.path.join(out_dir, f"{stem}.csv"),
        "summary": os.path.join(out_dir, f"{stem}_summary.json"),
    }
    temp = {k: v + ".tmp" for k, v in final.items()}

    try:
        derived = _RUNNERS[name](cfg, temp)
    except (ConfigError, CommandError):
        _cleanup(temp.values())
        raise
    except Exception as exc:
        _cleanup(temp.values())
        raise CommandError(f"command {name!r} failed: {exc}") from exc

    envelope = ResultEnvelope(
        command=name,
        toolkit_version=__version__,
        timestamp_utc=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        config=cfg.resolved,
        outputs=final,
    )
    summary = {
        "command": envelope.command,
        "toolkit_version": envelope.toolkit_version,
        "timestamp_utc": envelope.timestamp_utc,
        "derived": derived,
        "config": envelope.config,
        "outputs": envelope.outputs,
    }
    with open(temp["summary"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for key in final:
        os.replace(temp[key], final[key])
    return envelope


def _cleanup(paths) -> None:
    for p in paths:
        try:
            os.remove(p)
        except OSError:
            pass
