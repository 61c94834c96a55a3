"""Configuration loading, defaulting, and unit conversion.

Config files are JSON (UTF-8, nested sections).  Every field is optional:
missing values are taken from the embedded reference profile, which encodes
a calibrated warm-cell pair (contact field of the noble gas 3 mG from the
strong-damping point, quoted decay linewidths, kappa0 = 540) so that every
anchor analysis runs with zero configuration.

All unit conversion to internal angular units happens here and only here:
gyromagnetic ratios are given in Hz/mG and multiplied by 2*pi; the decay
rates ``Gamma_a``/``Gamma_b`` are interpreted per ``rate_convention``
("cyclic": value in Hz, multiplied by 2*pi; "angular": value already in
rad/s).  The reference profile pins the convention to "angular": with the
cyclic reading of the quoted linewidths the bias-field dependence of the
noble-gas decoherence and the size of the interference asymmetry cannot both
match the calibration anchors.  The convention in force is echoed in every
result envelope.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .model import TWO_PI, ConfigurationError, EnsembleParams, SystemModel
from .response import DriveSpec
from .sensing import GradientModel, NoiseBudget, NoiseEntry

REFERENCE_PROFILE: dict[str, Any] = {
    "system": {
        "gamma_a_hz_per_mg": 700.0,
        "gamma_b_hz_per_mg": 1.1777,
        "Gamma_a": 30000.0,
        "Gamma_b": 0.007,
        "rate_convention": "angular",
        "lambda_Ma_mg": 0.00778,
        "lambda_Mb_mg": 3.0,
        "kappa0": 540.0,
        "Bz_mg": -8.59,
    },
    "drive": {
        # theta pinned to the optimal azimuth of the reference bias field
        "amplitude_mg": 1e-6,
        "theta_rad": 2.2566542386417248,
        "mode": "magnetic",
    },
    "sweep": {
        "freq": {"start_hz": 8.0, "stop_hz": 10.6, "count": 4601, "spacing": "linear"},
        "theta": {"start_rad": 0.0, "stop_rad": math.pi, "count": 181},
        "field": {"start_mg": -100.0, "stop_mg": 100.0, "count": 1001, "spacing": "linear"},
    },
    "gradient": {"epsilon_g": 4e-4, "tau_c_s": 4.8644e-3, "enabled": True},
    "noise": {
        "entries": [
            {"name": "photon-shot", "level_ft": 1800.0, "kind": "non-interacting"},
            {"name": "magnetic-environment", "level_ft": 100.0, "kind": "field-like"},
        ]
    },
    "normalization": {"ref_freq_hz": 300.0},
    "fit": {"input_csv": None, "column": "amplitude"},
    "integrate": {
        "t_end_s": 2.0,
        "dt_out_s": 0.001,
        "drive_freq_hz": 10.10530581669437,  # reference dressed resonance
        "a0": [0.0, 0.0],
        "b0": [0.0, 0.0],
    },
    "budget": {"operating_point": "amplification"},
    "output": {"directory": "out"},
}

_STRING_CHOICES = {
    "system.rate_convention": ("angular", "cyclic"),
    "drive.mode": ("magnetic", "pseudo_a", "pseudo_b"),
    "sweep.freq.spacing": ("linear", "log"),
    "sweep.field.spacing": ("linear", "log"),
    "fit.column": ("amplitude", "amplitude_normalized"),
    "budget.operating_point": ("amplification", "deamplification"),
    "noise.entries.kind": ("non-interacting", "field-like"),
}


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


def _reject_constant(name: str) -> float:
    raise ConfigError(f"non-finite number {name!r} is not allowed in a config")


def _check_finite(value: Any, path: str) -> None:
    if isinstance(value, bool):
        return
    if isinstance(value, (int, float)) and not math.isfinite(value):
        raise ConfigError(f"non-finite value at {path!r}")


def _validate_against(reference: Any, user: Any, path: str) -> None:
    if isinstance(reference, dict):
        if not isinstance(user, dict):
            raise ConfigError(f"expected a section at {path!r}, got {type(user).__name__}")
        unknown = sorted(set(user) - set(reference))
        if unknown:
            listed = ", ".join(f"{path}.{k}".lstrip(".") for k in unknown)
            raise ConfigError(f"unknown config keys: {listed}")
        for key, val in user.items():
            _validate_against(reference[key], val, f"{path}.{key}".lstrip("."))
    elif isinstance(reference, list) and reference and isinstance(reference[0], dict):
        if not isinstance(user, list):
            raise ConfigError(f"expected a list at {path!r}")
        for i, item in enumerate(user):
            _validate_against(reference[0], item, f"{path}[{i}]")
    elif isinstance(user, list):
        for i, item in enumerate(user):
            _check_finite(item, f"{path}[{i}]")
    else:
        _check_finite(user, path)


def _merge(reference: dict, user: dict) -> dict:
    out = copy.deepcopy(reference)
    for key, val in user.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _check_choices(resolved: dict) -> None:
    for dotted, choices in _STRING_CHOICES.items():
        parts = dotted.split(".")
        if parts[:2] == ["noise", "entries"]:
            for i, entry in enumerate(resolved["noise"]["entries"]):
                if entry.get("kind") not in choices:
                    raise ConfigError(
                        f"noise.entries[{i}].kind must be one of {choices}, got {entry.get('kind')!r}"
                    )
            continue
        node: Any = resolved
        for p in parts:
            node = node[p]
        if node not in choices:
            raise ConfigError(f"{dotted} must be one of {choices}, got {node!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration with typed model/drive accessors."""

    resolved: dict[str, Any]

    def model(self) -> SystemModel:
        sys = self.resolved["system"]
        factor = TWO_PI if sys["rate_convention"] == "cyclic" else 1.0
        try:
            a = EnsembleParams(
                gamma=TWO_PI * float(sys["gamma_a_hz_per_mg"]),
                Gamma=factor * float(sys["Gamma_a"]),
                mz_field=float(sys["lambda_Ma_mg"]),
            )
            b = EnsembleParams(
                gamma=TWO_PI * float(sys["gamma_b_hz_per_mg"]),
                Gamma=factor * float(sys["Gamma_b"]),
                mz_field=float(sys["lambda_Mb_mg"]),
            )
            return SystemModel(a=a, b=b, kappa0=float(sys["kappa0"]), Bz=float(sys["Bz_mg"]))
        except ConfigurationError as exc:
            raise ConfigError(f"invalid system parameters: {exc}") from exc

    def drive(self, freq: float | None = None) -> DriveSpec:
        drv = self.resolved["drive"]
        if freq is None:
            freq = float(self.resolved["sweep"]["freq"]["start_hz"])
        try:
            return DriveSpec(
                amplitude=float(drv["amplitude_mg"]),
                freq=float(freq),
                theta=float(drv["theta_rad"]),
                mode=str(drv["mode"]),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid drive parameters: {exc}") from exc

    def _grid(self, start: float, stop: float, count: int, spacing: str) -> np.ndarray:
        if count < 2:
            raise ConfigError(f"grid count must be >= 2, got {count}")
        if spacing == "log":
            if start <= 0.0 or stop <= 0.0:
                raise ConfigError("log spacing requires positive endpoints")
            return np.geomspace(start, stop, count)
        return np.linspace(start, stop, count)

    def freq_grid(self) -> np.ndarray:
        g = self.resolved["sweep"]["freq"]
        return self._grid(float(g["start_hz"]), float(g["stop_hz"]), int(g["count"]), g["spacing"])

    def theta_grid(self) -> np.ndarray:
        g = self.resolved["sweep"]["theta"]
        if int(g["count"]) < 2:
            raise ConfigError(f"grid count must be >= 2, got {g['count']}")
        return np.linspace(float(g["start_rad"]), float(g["stop_rad"]), int(g["count"]))

    def field_grid(self) -> np.ndarray:
        g = self.resolved["sweep"]["field"]
        return self._grid(float(g["start_mg"]), float(g["stop_mg"]), int(g["count"]), g["spacing"])

    def gradient(self) -> GradientModel:
        g = self.resolved["gradient"]
        try:
            return GradientModel(
                epsilon_g=float(g["epsilon_g"]), tau_c=float(g["tau_c_s"]),
                enabled=bool(g["enabled"]),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid gradient parameters: {exc}") from exc

    def budget(self) -> NoiseBudget:
        entries = self.resolved["noise"]["entries"]
        try:
            return NoiseBudget(entries=tuple(
                NoiseEntry(name=str(e["name"]), level_ft=float(e["level_ft"]), kind=str(e["kind"]))
                for e in entries
            ))
        except ValueError as exc:
            raise ConfigError(f"invalid noise budget: {exc}") from exc

    @property
    def ref_freq(self) -> float:
        return float(self.resolved["normalization"]["ref_freq_hz"])

    @property
    def out_dir(self) -> str:
        return str(self.resolved["output"]["directory"])


def parse_config_text(text: str) -> dict:
    """Parse config JSON text; an empty document means `use every default`."""
    if not text.strip():
        return {}
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return data


def resolve_config(user: dict) -> RunConfig:
    """Validate a raw config dict, apply defaults, and freeze the result."""
    _validate_against(REFERENCE_PROFILE, user, "")
    resolved = _merge(REFERENCE_PROFILE, user)
    _check_choices(resolved)
    cfg = RunConfig(resolved=resolved)
    cfg.model()   # surface invalid physical parameters now
    cfg.drive()
    cfg.gradient()
    cfg.budget()
    return cfg


def load_config(path: str) -> RunConfig:
    """Read a config file and return the fully resolved configuration."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    return resolve_config(parse_config_text(text))


def apply_override(user: dict, assignment: str) -> None:
    """Apply one ``dotted.key=value`` override in place (value parsed as JSON)."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like key=value, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    parts = [p for p in dotted.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"empty override key in {assignment!r}")
    try:
        value = json.loads(raw, parse_constant=_reject_constant)
    except json.JSONDecodeError:
        value = raw
    node = user
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} crosses a non-section value")
    node[parts[-1]] = value
