import numpy as np
import pytest

from vqesim import ansatz as anz
from vqesim import hamiltonians as ham
from vqesim.linalg import HermitianOperator, normalize_state, op_norm, unitary_exp


def su_basis(n):
    """All non-identity Pauli strings on n qubits, normalized: a complete
    basis of the su(2^n) algebra."""
    labels = [""]
    for _ in range(n):
        labels = [s + c for s in labels for c in "IXYZ"]
    labels.remove("I" * n)
    gens = [
        HermitianOperator(ham.normalize_generator(ham.pauli_string_matrix(ham.PauliString(s)).matrix))
        for s in labels
    ]
    return ham.GeneratorSet(gens, labels, name=f"su_basis({n})")


class TestSubgroupHaarSample:
    def test_empty_product_is_identity(self, rng):
        u = anz.subgroup_haar_sample(ham.tfi2(3), 0, rng)
        np.testing.assert_array_equal(u, np.eye(8))

    def test_unitary(self, rng):
        u = anz.subgroup_haar_sample(ham.tfi2(3), 20, rng)
        assert op_norm(u.conj().T @ u - np.eye(8)) <= 1e-10

    def test_apply_matches_matrix(self):
        gens = ham.xxz4(4)
        phi = ham.singlet_state(4)
        u = anz.subgroup_haar_sample(gens, 7, np.random.default_rng(5))
        v = anz.subgroup_haar_apply(gens, phi, 7, np.random.default_rng(5))
        np.testing.assert_allclose(u @ phi, v, atol=1e-12)

    def test_full_basis_first_moment_approaches_haar(self):
        # with a complete su(d) basis the walk approximates SU(d) Haar
        gens = su_basis(2)
        d, samples = 4, 10_000
        rng = np.random.default_rng(42)
        a = ham.gue_traceless(d, rng) + 0.3 * np.eye(d)
        acc = np.zeros((d, d), dtype=complex)
        for _ in range(samples):
            u = anz.subgroup_haar_sample(gens, 20, rng)
            acc += u @ a @ u.conj().T
        acc /= samples
        dev = op_norm(acc - np.trace(a) / d * np.eye(d))
        assert dev <= 5 * op_norm(a) / np.sqrt(samples)

    def test_block_diagonal_against_invariant_subspace(self):
        # samples preserve the support of the estimated projector
        from vqesim.effective import estimate_projector, extract_basis

        gens = ham.tfi2(4)
        phi = ham.zero_state(4)
        rng = np.random.default_rng(3)
        pi = estimate_projector(gens, phi, 100, 20, rng)
        q, _ = extract_basis(pi)
        complement = np.eye(16) - q @ q.conj().T
        for _ in range(10):
            u = anz.subgroup_haar_sample(gens, 20, rng)
            assert op_norm(complement @ u @ q) <= 1e-8


class TestBuildPartiallyTrainable:
    def test_p1_structure(self, rng):
        gens = ham.tfi2(2)
        a = anz.build_partially_trainable(gens, 0, 1, 5, rng)
        theta = np.array([0.37])
        expected = a.frozen[1] @ unitary_exp(a.h.matrix, 0.37) @ a.frozen[0]
        np.testing.assert_allclose(a.apply(theta), expected, atol=1e-12)

    def test_has_p_plus_one_frozen(self, rng):
        a = anz.build_partially_trainable(ham.tfi2(2), 0, 5, 10, rng)
        assert len(a.frozen) == 6
        assert a.p == 5

    def test_seed_determinism(self):
        gens = ham.tfi2(3)
        a1 = anz.build_partially_trainable(gens, 0, 3, 10, np.random.default_rng(7))
        a2 = anz.build_partially_trainable(gens, 0, 3, 10, np.random.default_rng(7))
        for u1, u2 in zip(a1.frozen, a2.frozen):
            assert np.array_equal(u1, u2)

    def test_universal_fast_path(self, rng):
        gens = su_basis(2)
        gens.universal = True
        a = anz.build_partially_trainable(gens, 0, 2, 20, rng)
        for u in a.frozen:
            assert op_norm(u.conj().T @ u - np.eye(4)) <= 1e-10
            assert abs(np.linalg.det(u) - 1.0) <= 1e-10

    def test_loss_matches_naive_evaluator(self, rng):
        # explicit matrix-product re-implementation at p=30
        gens = ham.tfi2(4)
        m = ham.tfi1d(4, 0.3)
        phi = ham.uniform_state(4)
        a = anz.build_partially_trainable(gens, 0, 30, 20, rng)
        theta = rng.uniform(0, 2 * np.pi, 30)
        u = a.frozen[0].copy()
        h = a.h.matrix
        for l in range(30):
            w, v = np.linalg.eigh(h)
            rot = v @ np.diag(np.exp(-1j * theta[l] * w)) @ v.conj().T
            u = a.frozen[l + 1] @ rot @ u
        naive = np.vdot(u @ phi, m.matrix @ (u @ phi)).real
        psi = a.output_state(theta, phi)
        fast = np.vdot(psi, m.matrix @ psi).real
        assert abs(naive - fast) <= 1e-8

    def test_distribution_invariance_under_parameter_shift(self):
        # first moment of U(theta) A U(theta)^dag is independent of theta
        gens = su_basis(2)
        gens.universal = True
        d, samples = 4, 4000
        a_fixed = ham.gue_traceless(d, np.random.default_rng(2))
        means = []
        for theta in (np.zeros(3), np.array([0.9, -2.2, 4.0])):
            rng = np.random.default_rng(11)
            acc = np.zeros((d, d), dtype=complex)
            for _ in range(samples):
                ans = anz.build_partially_trainable(gens, 0, 3, 20, rng)
                u = ans.apply(theta)
                acc += u @ a_fixed @ u.conj().T
            means.append(acc / samples)
        assert op_norm(means[0] - means[1]) <= 10 * op_norm(a_fixed) / np.sqrt(samples)


class TestApplyAndSuffix:
    def test_zero_angles_fully_trainable(self, rng):
        a = anz.FullyTrainableAnsatz(ham.tfi2(3), 2)
        np.testing.assert_allclose(a.apply(np.zeros(a.p)), np.eye(8), atol=1e-12)
        phi = normalize_state(rng.standard_normal(8) + 1j * rng.standard_normal(8))
        np.testing.assert_allclose(a.output_state(np.zeros(a.p), phi), phi, atol=1e-12)

    def test_zero_angles_partially_trainable(self, rng):
        a = anz.build_partially_trainable(ham.tfi2(3), 1, 3, 10, rng)
        expected = a.frozen[3] @ a.frozen[2] @ a.frozen[1] @ a.frozen[0]
        np.testing.assert_allclose(a.apply(np.zeros(3)), expected, atol=1e-12)

    def test_product_split(self, rng):
        a = anz.build_partially_trainable(ham.tfi2(3), 0, 6, 10, rng)
        theta = rng.uniform(0, 2 * np.pi, 6)
        full = a.apply(theta)
        for split in (1, 3, 5):
            prefix = a.frozen[0].copy()
            for j in range(split):
                prefix = a.slot_unitary(j, theta[j]) @ prefix
            suffix = np.eye(8, dtype=complex)
            for j in range(split, 6):
                suffix = a.slot_unitary(j, theta[j]) @ suffix
            np.testing.assert_allclose(suffix @ prefix, full, atol=1e-10)

    def test_suffix_unitaries(self, rng):
        a = anz.build_partially_trainable(ham.tfi2(3), 0, 4, 10, rng)
        theta = rng.uniform(0, 2 * np.pi, 4)
        suff = anz.suffix_unitaries(a, theta)
        np.testing.assert_allclose(suff[3], a.slot_unitary(3, theta[3]), atol=1e-12)
        np.testing.assert_allclose(suff[0] @ a.frozen[0], a.apply(theta), atol=1e-10)
        for s in suff:
            assert op_norm(s.conj().T @ s - np.eye(8)) <= 1e-10

    def test_suffix_conjugation_preserves_spectrum(self, rng):
        a = anz.build_partially_trainable(ham.xxz4(4), 2, 5, 10, rng)
        theta = rng.uniform(0, 2 * np.pi, 5)
        h = a.h.matrix
        base = np.linalg.eigvalsh(h)
        for s in anz.suffix_unitaries(a, theta):
            np.testing.assert_allclose(np.linalg.eigvalsh(s @ h @ s.conj().T), base, atol=1e-9)

    def test_theta_length_checked(self, rng):
        a = anz.FullyTrainableAnsatz(ham.tfi2(2), 2)
        with pytest.raises(ValueError):
            a.apply(np.zeros(3))


class TestFullyTrainableGradientStructure:
    def test_slot_derivative_matches_finite_difference(self, rng):
        # dU/dtheta_j = -i (suffix including slot j) H_g(j) (prefix)
        gens = ham.tfi2(2)
        a = anz.FullyTrainableAnsatz(gens, 3)
        theta = rng.uniform(0, 2 * np.pi, a.p)
        eps = 1e-6
        for j in (0, 3, 5):
            e = np.zeros(a.p)
            e[j] = eps
            fd = (a.apply(theta + e) - a.apply(theta - e)) / (2 * eps)
            suffix = np.eye(4, dtype=complex)
            for i in range(j, a.p):
                suffix = a.slot_unitary(i, theta[i]) @ suffix
            prefix = np.eye(4, dtype=complex)
            for i in range(j):
                prefix = a.slot_unitary(i, theta[i]) @ prefix
            h = gens.generators[a.generator_of_slot(j)].matrix
            analytic = -1j * suffix @ h @ prefix
            assert op_norm(fd - analytic) / op_norm(analytic) <= 1e-6
