"""Sensitivity budgets at the two interference operating points, and
pseudo-field transduction.

Readout-chain noise (photon shot noise) does not interact with the noble
gas, so the amplification point divides it by eta.  Magnetic noise rides
along with the signal, so the deamplification point suppresses it by the
measured notch depth instead.  A pseudo-magnetic drive on the noble gas is
transduced into an equivalent real field eta times larger.

Run:  python demos/sensing_budgets.py
"""

import numpy as np

from fanospin import (
    DriveSpec,
    NoiseBudget,
    NoiseEntry,
    amplification_factor,
    deamplification_suppression,
    eigenmodes,
    optimal_theta,
    resolve_config,
    sensitivity_report,
    transduce_pseudo_field,
)

model = resolve_config({}).model()
eta = amplification_factor(model)
budget = NoiseBudget(entries=(
    NoiseEntry("photon-shot", 1800.0, "non-interacting"),
    NoiseEntry("magnetic-environment", 100.0, "field-like"),
))

print(f"amplification factor eta = {eta:.1f}\n")
print("budget entries:")
for e in budget.entries:
    print(f"  {e.name:22s} {e.level_ft:8.1f} fT/sqrt(Hz)  [{e.kind}]")

amp = sensitivity_report(model, budget, "amplification")
print("\namplification point:")
print(f"  effective sensitivity : {amp.effective_sensitivity_ft:8.2f} fT/sqrt(Hz)")
print(f"  gain below detection  : {amp.suppression_or_gain_db:8.2f} dB")
print(f"  energy resolution     : {amp.energy_resolution_ev:.3e} eV/sqrt(Hz)")

deamp = sensitivity_report(model, budget, "deamplification")
suppression, nu_min = deamplification_suppression(model)
print("\ndeamplification point:")
print(f"  measured suppression  : {suppression:8.0f}x at {nu_min:.3f} Hz")
print(f"  effective sensitivity : {deamp.effective_sensitivity_ft:8.2f} fT/sqrt(Hz)")
print(f"  noise suppression     : {deamp.suppression_or_gain_db:8.2f} dB")

modes = eigenmodes(model)
theta = optimal_theta(model, model.Bz)
for mode, nu in (("pseudo_b", modes.nu_tilde_b_hz), ("pseudo_a", 300.0)):
    tr = transduce_pseudo_field(model, DriveSpec(1e-6, nu, theta, mode))
    print(f"\npseudo-field transduction ({mode} at {nu:.2f} Hz):")
    print(f"  equivalent-field gain : {tr.gain:10.2f}")
