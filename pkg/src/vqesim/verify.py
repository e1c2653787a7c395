"""Built-in property suite: gradient checks, Haar moments, commutator lemmas,
Taylor bounds, the two-level flow solution, and noisy-step consistency.

Each check returns a CheckResult; the CLI reports pass/fail counts and the
test suite asserts them individually. All randomness is internally seeded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ansatz as anz
from . import dynamics as dyn
from . import hamiltonians as ham
from .linalg import (
    HermitianOperator,
    fro_norm,
    haar_unitary,
    normalize_state,
    op_norm,
    partial_trace_first,
    unitary_exp,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_instance(rng: np.random.Generator, p: int = 6):
    gens = ham.tfi2(2)
    a = anz.build_partially_trainable(gens, int(rng.integers(0, gens.size)), p, 10, rng)
    m = HermitianOperator(ham.gue_traceless(4, rng) + 2.0 * np.eye(4))
    phi = normalize_state(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    return dyn.VqeInstance(m, phi, a)


def check_gradient_finite_difference(cases: int = 50, seed: int = 11) -> CheckResult:
    """Analytic gradient vs central differences on random 2-qubit instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    eps = 1e-5
    for _ in range(cases):
        inst = _random_instance(rng)
        p = inst.ansatz.p
        theta = rng.uniform(0, 2 * np.pi, size=p)
        grad = dyn.analytic_gradient(inst, theta)
        fd = np.empty(p)
        for j in range(p):
            e = np.zeros(p)
            e[j] = eps
            fd[j] = (dyn.loss(inst, theta + e) - dyn.loss(inst, theta - e)) / (2 * eps)
        rel = np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12)
        worst = max(worst, rel)
    return CheckResult(
        "gradient_vs_finite_difference", worst <= 1e-5, f"worst relative error {worst:.3e} (tol 1e-5)"
    )


def check_commutator_eigenvalues(cases: int = 1000, seed: int = 12) -> CheckResult:
    """Nonzero eigenvalues of i[xx†, vv†] are ±|⟨x,v⟩|√(1−|⟨x,v⟩|²)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        d = int(rng.integers(2, 9))
        x = normalize_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))
        v = normalize_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))
        comm = 1j * (np.outer(x, x.conj()) @ np.outer(v, v.conj())
                     - np.outer(v, v.conj()) @ np.outer(x, x.conj()))
        w = np.linalg.eigvalsh(comm)
        ov = abs(np.vdot(x, v))
        expected = ov * np.sqrt(max(1 - ov * ov, 0.0))
        worst = max(worst, abs(w[-1] - expected), abs(w[0] + expected))
    return CheckResult(
        "commutator_eigenvalue_pair", worst <= 1e-10, f"worst eigenvalue error {worst:.3e} (tol 1e-10)"
    )


def check_commutator_norm_bound(cases: int = 1000, seed: int = 13) -> CheckResult:
    """‖[M, xx†]‖_F ≤ √2(λ_d−λ₁)√(1−|⟨x,v₁⟩|²)."""
    rng = np.random.default_rng(seed)
    worst_margin = np.inf
    ok = True
    for d in (4, 8):
        m = ham.gue_traceless(d, rng)
        w, v = np.linalg.eigh(m)
        for _ in range(cases):
            x = normalize_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))
            lhs = fro_norm(m @ np.outer(x, x.conj()) - np.outer(x, x.conj()) @ m)
            ov = abs(np.vdot(v[:, 0], x))
            rhs = np.sqrt(2) * (w[-1] - w[0]) * np.sqrt(max(1 - ov * ov, 0.0))
            ok = ok and lhs <= rhs + 1e-10
            worst_margin = min(worst_margin, rhs - lhs)
    return CheckResult(
        "commutator_frobenius_bound", ok, f"smallest bound margin {worst_margin:.3e}"
    )


def check_taylor_bound(cases: int = 1000, seed: int = 14) -> CheckResult:
    """‖(VKV†)^⊗2 − K^⊗2‖_op ≤ 4|θ|·‖H‖_op·‖K‖²_op for V = exp(−iθH)."""
    rng = np.random.default_rng(seed)
    ok = True
    worst_margin = np.inf
    for _ in range(cases):
        d = int(rng.integers(2, 5))
        h = ham.gue_traceless(d, rng)
        k = ham.gue_traceless(d, rng)
        theta = rng.uniform(-1, 1)
        v = unitary_exp(h, theta)
        vk = v @ k @ v.conj().T
        lhs = op_norm(np.kron(vk, vk) - np.kron(k, k))
        rhs = 4 * abs(theta) * op_norm(h) * op_norm(k) ** 2
        ok = ok and lhs <= rhs + 1e-9
        worst_margin = min(worst_margin, rhs - lhs)
    return CheckResult("taylor_expansion_bound", ok, f"smallest bound margin {worst_margin:.3e}")


def check_partial_trace(seed: int = 15) -> CheckResult:
    """tr₁(X⊗Y) = tr(X)·Y, trace preservation, and linearity."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 3, 4):
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        y = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        worst = max(worst, np.abs(partial_trace_first(np.kron(x, y), d) - np.trace(x) * y).max())
        a = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        b = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        worst = max(worst, abs(np.trace(partial_trace_first(a, d)) - np.trace(a)))
        lin = partial_trace_first(1.7 * a - 0.3j * b, d) - (
            1.7 * partial_trace_first(a, d) - 0.3j * partial_trace_first(b, d)
        )
        worst = max(worst, np.abs(lin).max())
    return CheckResult("partial_trace_identities", worst <= 1e-10, f"worst deviation {worst:.3e}")


def check_unitarity(seed: int = 16) -> CheckResult:
    """Constructed operators are unitary within 1e-10."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 3, 8):
        u = haar_unitary(d, rng)
        worst = max(worst, op_norm(u.conj().T @ u - np.eye(d)))
        worst = max(worst, abs(abs(np.linalg.det(u)) - 1.0))
    gens = ham.tfi2(3)
    u = anz.subgroup_haar_sample(gens, 20, rng)
    worst = max(worst, op_norm(u.conj().T @ u - np.eye(8)))
    a = anz.build_partially_trainable(gens, 0, 4, 10, rng)
    u = a.apply(rng.uniform(0, 2 * np.pi, 4))
    worst = max(worst, op_norm(u.conj().T @ u - np.eye(8)))
    full = anz.FullyTrainableAnsatz(gens, 3)
    u = full.apply(rng.uniform(0, 2 * np.pi, full.p))
    worst = max(worst, op_norm(u.conj().T @ u - np.eye(8)))
    h = ham.gue_traceless(5, rng)
    u = unitary_exp(h, rng.uniform(-3, 3))
    worst = max(worst, op_norm(u.conj().T @ u - np.eye(5)))
    return CheckResult("unitarity", worst <= 1e-10, f"worst unitarity defect {worst:.3e}")


def check_rgf_two_level(dt: float = 1e-3, t_max: float = 5.0) -> CheckResult:
    """Euler-integrated flow matches the closed-form logistic decay of the
    excited-state weight for M = diag(0, 1)."""
    alpha = 0.9
    m = HermitianOperator(np.diag([0.0, 1.0]).astype(complex))
    psi0 = np.array([np.cos(alpha), np.sin(alpha)], dtype=complex)
    times, errors = dyn.rgf_integrate(m, psi0, dt, t_max)
    q0 = np.sin(alpha) ** 2
    closed = q0 * np.exp(-2 * times) / (1 - q0 + q0 * np.exp(-2 * times))
    worst = float(np.abs(errors - closed).max())
    return CheckResult("rgf_two_level_closed_form", worst <= 1e-4, f"worst error {worst:.3e} (tol 1e-4)")


def check_noisy_step_consistency(seed: int = 17) -> CheckResult:
    """One noisy minus one noiseless step equals η·Σ_l i·ε_l·H_l|Ψ⟩ up to O(η²).

    Verified by a ratio test: the residual must shrink ~100× from η=1e-3 to
    η=1e-4.
    """
    rng = np.random.default_rng(seed)
    inst = _random_instance(rng, p=8)
    p = inst.ansatz.p
    theta = rng.uniform(0, 2 * np.pi, size=p)
    grad = dyn.analytic_gradient(inst, theta)
    eps = rng.standard_normal(p)
    psi = inst.ansatz.output_state(theta, inst.input_state)
    suff = anz.suffix_unitaries(inst.ansatz, theta)
    hmat = inst.ansatz.h.matrix
    drift = np.zeros_like(psi)
    for l, s in enumerate(suff):
        drift += 1j * eps[l] * (s @ hmat @ s.conj().T) @ psi
    residuals = []
    for eta in (1e-3, 1e-4):
        psi_clean = inst.ansatz.output_state(theta - eta * grad, inst.input_state)
        psi_noisy = inst.ansatz.output_state(theta - eta * (grad + eps), inst.input_state)
        residuals.append(np.linalg.norm((psi_noisy - psi_clean) - eta * drift))
    ratio = residuals[0] / max(residuals[1], 1e-300)
    ok = 30.0 <= ratio <= 300.0
    return CheckResult(
        "noisy_step_first_order", ok, f"residual ratio {ratio:.1f} for eta 1e-3 vs 1e-4 (expect ~100)"
    )


def check_haar_first_moment(samples: int = 10_000, seed: int = 18) -> CheckResult:
    """(1/S)·Σ U A U† → tr(A)·I/d within 5‖A‖_op/√S for d ∈ {2, 4}."""
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    for d in (2, 4):
        a = ham.gue_traceless(d, rng) + 0.5 * np.eye(d)
        acc = np.zeros((d, d), dtype=complex)
        for _ in range(samples):
            u = haar_unitary(d, rng)
            acc += u @ a @ u.conj().T
        acc /= samples
        dev = op_norm(acc - np.trace(a) / d * np.eye(d))
        worst_ratio = max(worst_ratio, dev / (5 * op_norm(a) / np.sqrt(samples)))
    return CheckResult(
        "haar_first_moment", worst_ratio <= 1.0, f"deviation at {worst_ratio:.2f} of the 5‖A‖/√S budget"
    )


ALL_CHECKS = (
    check_gradient_finite_difference,
    check_commutator_eigenvalues,
    check_commutator_norm_bound,
    check_taylor_bound,
    check_partial_trace,
    check_unitarity,
    check_rgf_two_level,
    check_noisy_step_consistency,
    check_haar_first_moment,
)


def run_all(report=None) -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        res = check()
        results.append(res)
        if report:
            report(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    return results
