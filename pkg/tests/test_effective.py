import numpy as np
import pytest

from vqesim import effective as eff
from vqesim import hamiltonians as ham
from vqesim.linalg import HermitianOperator, normalize_state, op_norm


class TestEstimateProjector:
    def test_single_sample_is_rank_one(self, rng):
        gens = ham.tfi2(3)
        pi = eff.estimate_projector(gens, ham.zero_state(3), 1, 10, rng)
        w = pi.spectrum
        assert np.isclose(w[-1], 1.0)
        assert np.all(w[:-1] <= 1e-10)

    def test_psd_unit_trace(self, rng):
        gens = ham.xxz4(4)
        pi = eff.estimate_projector(gens, ham.singlet_state(4), 25, 20, rng)
        assert pi.spectrum[0] >= -1e-10
        assert abs(np.trace(pi.matrix) - 1.0) <= 1e-8

    def test_rejects_zero_samples(self, rng):
        with pytest.raises(ValueError):
            eff.estimate_projector(ham.tfi2(2), ham.zero_state(2), 0, 5, rng)

    def test_extract_rejects_zero_projector(self):
        with pytest.raises(ValueError):
            eff.extract_basis(HermitianOperator(np.zeros((4, 4), dtype=complex)))


class TestExtractBasis:
    def test_rank_one(self, rng):
        gens = ham.tfi2(3)
        pi = eff.estimate_projector(gens, ham.zero_state(3), 1, 10, rng)
        q, d_eff = eff.extract_basis(pi)
        assert d_eff == 1
        assert q.shape == (8, 1)

    def test_tfi2_profile(self, rng):
        pi = eff.estimate_projector(ham.tfi2(4), ham.zero_state(4), 100, 20, rng)
        _, d_eff = eff.extract_basis(pi)
        assert d_eff == 4

    def test_xxz6_profile(self, rng):
        pi = eff.estimate_projector(ham.xxz6(6), ham.singlet_state(6), 100, 20, rng)
        _, d_eff = eff.extract_basis(pi)
        assert d_eff == 5

    def test_orthonormal_columns(self, rng):
        pi = eff.estimate_projector(ham.tfi2(4), ham.zero_state(4), 60, 20, rng)
        q, d_eff = eff.extract_basis(pi)
        np.testing.assert_allclose(q.conj().T @ q, np.eye(d_eff), atol=1e-10)

    def test_stable_between_r50_and_r100(self):
        gens = ham.xxz4(4)
        phi = ham.singlet_state(4)
        d_effs = []
        for r in (50, 100):
            pi = eff.estimate_projector(gens, phi, r, 20, np.random.default_rng(1))
            d_effs.append(eff.extract_basis(pi)[1])
        assert d_effs[0] == d_effs[1] == 3


class TestEffectiveSpectrum:
    def test_full_basis_recovers_spectrum(self, rng):
        m = ham.tfi1d(3, 0.5)
        lam, kappa, degenerate = eff.effective_spectrum(m, np.eye(8, dtype=complex))
        np.testing.assert_allclose(lam, m.spectrum, atol=1e-10)
        assert not degenerate
        w = m.spectrum
        assert np.isclose(kappa, (w[-1] - w[0]) / (w[1] - w[0]))

    def test_basis_choice_invariance(self, rng):
        gens = ham.tfi2(4)
        m = ham.tfi1d(4, 0.3)
        phi = ham.zero_state(4)
        lams = []
        for seed in (1, 2):
            pi = eff.estimate_projector(gens, phi, 100, 20, np.random.default_rng(seed))
            q, d_eff = eff.extract_basis(pi)
            assert d_eff == 4
            # scramble the basis within its span
            mix = np.linalg.qr(
                np.random.default_rng(seed + 10).standard_normal((4, 4))
                + 1j * np.random.default_rng(seed + 20).standard_normal((4, 4))
            )[0]
            lam, _, _ = eff.effective_spectrum(m, q @ mix)
            lams.append(lam)
        np.testing.assert_allclose(lams[0], lams[1], atol=1e-8)

    def test_degenerate_sentinel(self):
        m = HermitianOperator(np.diag([1.0, 1.0, 2.0]).astype(complex))
        lam, kappa, degenerate = eff.effective_spectrum(m, np.eye(3, dtype=complex))
        assert degenerate
        assert np.isinf(kappa)


class TestCompatibility:
    def test_full_space_is_compatible(self, rng):
        m = ham.tfi1d(3, 0.5)
        ok, leak = eff.compatibility_check(m, np.eye(8, dtype=complex))
        assert ok and leak <= 1e-12

    def test_adversarial_complement_basis(self, rng):
        m = ham.tfi1d(2, 0.5)
        gs = m.eigvecs[:, 0]
        q = np.linalg.qr(np.eye(4, dtype=complex) - np.outer(gs, gs.conj()))[0][:, :3]
        ok, leak = eff.compatibility_check(m, q)
        assert not ok
        assert np.isclose(leak, 1.0, atol=1e-8)

    def test_tfi2_subspace_contains_ground_state(self, rng):
        m = ham.tfi1d(6, 0.3)
        pi = eff.estimate_projector(ham.tfi2(6), ham.zero_state(6), 100, 20, rng)
        q, _ = eff.extract_basis(pi)
        ok, leak = eff.compatibility_check(m, q)
        assert ok
        assert leak <= 1e-8


class TestSupportInvariance:
    def test_fresh_samples_stay_in_support(self, rng):
        from vqesim.ansatz import subgroup_haar_sample

        gens = ham.xxz4(4)
        pi = eff.estimate_projector(gens, ham.singlet_state(4), 100, 20, rng)
        q, _ = eff.extract_basis(pi)
        complement = np.eye(16) - q @ q.conj().T
        for _ in range(20):
            u = subgroup_haar_sample(gens, 20, rng)
            assert op_norm(complement @ u @ q) <= 5e-2


class TestEstimateProfile:
    def test_kitaev_profile(self):
        prof = eff.estimate_profile(
            ham.kitaev_hva(),
            ham.zero_state(8),
            ham.kitaev8(1.0, 1.0),
            rng=np.random.default_rng(8),
        )
        assert prof.d_eff == 76
        assert prof.compatible
        kappa, _ = eff.full_kappa(ham.kitaev8(1.0, 1.0))
        assert prof.kappa_eff < kappa

    def test_json_export(self, rng):
        prof = eff.estimate_profile(
            ham.tfi2(4), ham.zero_state(4), ham.tfi1d(4, 0.3), r_samples=50, rng=rng
        )
        import json

        payload = json.loads(prof.to_json())
        assert payload["d_eff"] == 4
        assert payload["compatible"] is True
        assert len(payload["effective_spectrum"]) == 4


class TestKappaScan:
    def test_single_point(self, rng):
        rows = eff.kappa_scan(
            lambda g: ham.tfi1d(4, g), [0.3], ham.tfi2(4), ham.zero_state(4), rng=rng
        )
        assert len(rows) == 1
        assert rows[0]["d_eff"] == 4
        assert rows[0]["kappa_eff"] < rows[0]["kappa"]

    def test_xxz_divergence_sentinel(self, rng):
        rows = eff.kappa_scan(
            lambda j: ham.xxz1d(4, j), [-1.0, 0.1], ham.xxz6(4), ham.singlet_state(4), rng=rng
        )
        assert rows[0]["degenerate_flag"]
        assert not rows[1]["degenerate_flag"]


class TestSpectrumFlattening:
    def test_support_spectrum_flattens_as_r_grows(self):
        gens = ham.tfi2(4)
        phi = ham.zero_state(4)
        spreads = []
        for r in (10, 100):
            pi = eff.estimate_projector(gens, phi, r, 20, np.random.default_rng(5))
            w = pi.spectrum
            support = w[w > 1e-6 * w[-1]]
            assert len(support) == 4
            spreads.append(support.max() / support.min())
        assert spreads[1] < spreads[0]


class TestTfi23KappaCoincidence:
    def test_effective_ratios_overlap_at_n6(self):
        phi = ham.zero_state(6)
        q2, d2 = eff.extract_basis(
            eff.estimate_projector(ham.tfi2(6), phi, 100, 20, np.random.default_rng(1))
        )
        q3, d3 = eff.extract_basis(
            eff.estimate_projector(ham.tfi3(6), phi, 100, 20, np.random.default_rng(2))
        )
        assert (d2, d3) == (8, 10)
        for g in (0.1, 0.5, 1.0, 1.5):
            m = ham.tfi1d(6, g)
            _, k2, _ = eff.effective_spectrum(m, q2)
            _, k3, _ = eff.effective_spectrum(m, q3)
            assert abs(k2 - k3) <= 1e-8 * k2
