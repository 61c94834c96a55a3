import numpy as np
import pytest

from fanospin import (
    ConfigurationError,
    EnsembleParams,
    SystemModel,
    build_matrix,
    delta_to_bz,
    eigenmodes,
    ep_metrics,
    self_compensation_field,
    splitting_slope,
    strong_damping_field,
)
from conftest import TWO_PI, random_model


def make_model(gamma_a=TWO_PI * 700.0, gamma_b=TWO_PI * 1.1777,
               Gamma_a=30000.0, Gamma_b=0.007,
               mza=0.00778, mzb=3.0, Bz=-8.59) -> SystemModel:
    return SystemModel(
        a=EnsembleParams(gamma=gamma_a, Gamma=Gamma_a, mz_field=mza),
        b=EnsembleParams(gamma=gamma_b, Gamma=Gamma_b, mz_field=mzb),
        kappa0=540.0,
        Bz=Bz,
    )


class TestValidation:
    def test_gamma_zero_rejected(self):
        with pytest.raises(ConfigurationError):
            EnsembleParams(gamma=0.0, Gamma=1.0, mz_field=1.0)

    def test_negative_decay_rejected(self):
        with pytest.raises(ConfigurationError):
            EnsembleParams(gamma=1.0, Gamma=-1.0, mz_field=1.0)

    def test_negative_coupling_radicand_rejected(self):
        with pytest.raises(ConfigurationError, match="imaginary coupling"):
            make_model(mza=-0.01)

    def test_lambda_identity_exact(self):
        m = make_model()
        assert m.lam == 8.0 * np.pi * 540.0 / 3.0


class TestBuildMatrix:
    def test_decoupled_limit_is_diagonal(self):
        m = make_model(mza=0.0)
        H = build_matrix(m)
        assert m.J == 0.0
        assert H[0, 1] == 0.0 and H[1, 0] == 0.0
        assert H[0, 0] == m.omega_a + 1j * m.a.Gamma
        assert H[1, 1] == m.omega_b + 1j * m.b.Gamma

    def test_off_diagonals_equal_and_real(self):
        H = build_matrix(make_model())
        assert H[0, 1] == H[1, 0]
        assert H[0, 1].imag == 0.0

    def test_reference_noble_gas_frequency(self):
        # Bz = -8.59 mG with the reference gyromagnetic ratio puts the
        # noble-gas line at 10.11 Hz.
        m = make_model()
        assert abs(abs(m.omega_b) / TWO_PI - 10.11) < 0.05

    def test_reference_coupling_strength(self):
        # calibrated contact fields give J close to 30 rad/s
        m = make_model()
        assert m.J == pytest.approx(27.561, rel=1e-3)


class TestEigenmodes:
    def test_decoupled_limit_exact(self):
        m = make_model(mzb=0.0)
        modes = eigenmodes(m)
        assert modes.lam_plus == complex(m.omega_a, m.a.Gamma)
        assert modes.lam_minus == complex(m.omega_b, m.b.Gamma)

    def test_forced_coalescence_at_matched_tuning(self):
        # delta = 0 and J = beta force the square root to zero
        m = make_model(gamma_a=1.0, gamma_b=1.0, mza=2.0, mzb=2.0,
                       Gamma_a=4.5, Gamma_b=0.5, Bz=-2.0)
        assert m.omega_a == m.omega_b and m.J == 2.0
        modes = eigenmodes(m)
        assert modes.lam_plus == modes.lam_minus == complex(m.omega_a, 2.5)

    def test_against_generic_eigensolver(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            m = random_model(rng)
            modes = eigenmodes(m)
            ours = sorted([modes.lam_plus, modes.lam_minus], key=lambda z: (z.real, z.imag))
            ref = sorted(np.linalg.eigvals(build_matrix(m)), key=lambda z: (z.real, z.imag))
            scale = max(abs(ref[0]), abs(ref[1]))
            assert abs(ours[0] - ref[0]) <= 1e-10 * scale
            assert abs(ours[1] - ref[1]) <= 1e-10 * scale

    def test_trace_preserved_for_random_models(self):
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            m = random_model(rng)
            modes = eigenmodes(m)
            H = build_matrix(m)
            tr = H[0, 0] + H[1, 1]
            assert abs(modes.lam_plus + modes.lam_minus - tr) <= 1e-12 * abs(tr)

    def test_product_matches_determinant(self):
        rng = np.random.default_rng(13)
        for _ in range(2000):
            m = random_model(rng)
            modes = eigenmodes(m)
            H = build_matrix(m)
            det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
            assert abs(modes.lam_plus * modes.lam_minus - det) <= 1e-10 * abs(det)

    def test_branch_labels_follow_bare_modes_at_weak_coupling(self):
        m = make_model(mza=1e-8)
        modes = eigenmodes(m)
        assert abs(modes.lam_plus - (m.omega_a + 1j * m.a.Gamma)) < 1e-3 * abs(m.omega_a)
        assert abs(modes.lam_minus - (m.omega_b + 1j * m.b.Gamma)) < 1e-3

    def test_continuity_in_bias_field(self):
        m = make_model()
        bz = np.linspace(-80.0, 80.0, 20001)
        lams = np.array([[eigenmodes(m.with_bz(b)).lam_plus,
                          eigenmodes(m.with_bz(b)).lam_minus] for b in bz])
        h = bz[1] - bz[0]
        # |d lambda/dBz| is bounded by the larger gyromagnetic ratio
        bound = 3.0 * m.a.gamma * h
        assert np.max(np.abs(np.diff(lams, axis=0))) < bound

    def test_decoupled_recovery_at_large_field(self):
        m = make_model()
        for bz in (1e4, -1e4):
            modes = eigenmodes(m.with_bz(bz))
            assert abs(modes.Gamma_tilde_b - m.b.Gamma) < 0.01 * m.b.Gamma

    def test_sign_symmetry(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            m = random_model(rng)
            flipped = SystemModel(
                a=EnsembleParams(m.a.gamma, m.a.Gamma, -m.a.mz_field),
                b=EnsembleParams(m.b.gamma, m.b.Gamma, -m.b.mz_field),
                kappa0=m.kappa0, Bz=-m.Bz,
            )
            mo, mf = eigenmodes(m), eigenmodes(flipped)
            scale = abs(mo.lam_plus) + abs(mo.lam_minus)
            assert abs(mf.lam_plus.real + mo.lam_plus.real) <= 1e-12 * scale
            assert abs(mf.lam_minus.real + mo.lam_minus.real) <= 1e-12 * scale
            assert abs(mf.lam_plus.imag - mo.lam_plus.imag) <= 1e-12 * scale
            assert abs(mf.lam_minus.imag - mo.lam_minus.imag) <= 1e-12 * scale


class TestSpecialFields:
    def test_strong_damping_reference_value(self):
        assert strong_damping_field(make_model()) == pytest.approx(-3.0, abs=0.3)

    def test_strong_damping_zero_magnetization(self):
        assert strong_damping_field(make_model(mza=0.0, mzb=0.0)) == 0.0

    def test_strong_damping_zeroes_detuning(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            m = random_model(rng)
            b = strong_damping_field(m)
            shifted = m.with_bz(b)
            delta = 0.5 * (shifted.omega_a - shifted.omega_b)
            assert abs(delta) < 1e-9 * max(abs(shifted.omega_a), 1.0)

    def test_identical_ratios_rejected(self):
        m = make_model(gamma_a=5.0, gamma_b=5.0, mza=1.0, mzb=1.0)
        with pytest.raises(ConfigurationError):
            strong_damping_field(m)

    def test_self_compensation_sum(self):
        assert self_compensation_field(make_model(mza=0.1, mzb=3.0)) == pytest.approx(-3.1)
        assert self_compensation_field(make_model(mza=0.0, mzb=0.0)) == 0.0

    def test_delta_to_bz_round_trip(self):
        m = make_model()
        for d in (-100.0, 0.0, 55.0):
            shifted = m.with_bz(delta_to_bz(m, d))
            assert 0.5 * (shifted.omega_a - shifted.omega_b) == pytest.approx(d, abs=1e-9)


class TestEpMetrics:
    def test_splitting_zero_at_zero_detuning(self):
        m = make_model()
        met = ep_metrics(m, np.array([0.0, m.J * 1e-4]))
        assert met.splitting[0] == 0.0
        assert met.splitting[1] > 0.0

    def test_square_root_scaling_slope(self):
        m = make_model()
        deltas = m.J * np.geomspace(1e-6, 1e-3, 40)
        met = ep_metrics(m, deltas)
        assert splitting_slope(met) == pytest.approx(0.5, abs=0.005)

    def test_splitting_matches_eigenmodes_of_retuned_model(self):
        m = make_model()
        deltas = m.J * np.geomspace(1e-4, 1e-1, 7)
        met = ep_metrics(m, deltas)
        for d, bz, s in zip(met.delta, met.bz, met.splitting):
            modes = eigenmodes(met.model.with_bz(bz))
            assert abs(modes.lam_plus.real - modes.lam_minus.real) == pytest.approx(
                s, rel=1e-6, abs=1e-9
            )

    def test_unreachable_without_retune_in_reference_regime(self):
        m = make_model()  # J/beta ~ 2e-3
        met = ep_metrics(m, np.array([0.0, 1.0]), retune=False)
        assert not met.reachable
        assert "EP unreachable" in met.note
        assert met.splitting[0] > 0.0  # gap never closes

    def test_enhancement_diverges_at_degeneracy(self):
        m = make_model()
        met = ep_metrics(m, np.array([0.0, m.J * 1e-6]))
        assert np.isinf(met.enhancement[0])
        assert met.enhancement[1] == pytest.approx(1e3, rel=1e-9)
