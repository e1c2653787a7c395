"""Invariant-subspace estimation: effective dimension, effective spectrum,
spectral ratio, and ansatz compatibility."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .ansatz import subgroup_haar_apply
from .hamiltonians import GeneratorSet
from .linalg import HermitianOperator

DEFAULT_R = 100
DEFAULT_L_SAMPLE = 20
DEFAULT_RANK_TOL = 1e-6
DEFAULT_LEAK_TOL = 1e-6

KAPPA_DEGENERATE = float("inf")


@dataclass
class EffectiveProfile:
    """Everything the subspace estimate yields for one (generators, input,
    problem Hamiltonian) combination."""

    pi_hat: HermitianOperator
    eigen_decay: np.ndarray
    basis_q: np.ndarray
    d_eff: int
    effective_spectrum: np.ndarray
    kappa_eff: float
    degenerate: bool
    compatible: bool
    ground_leakage: float
    r_samples: int
    l_sample: int
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "d_eff": self.d_eff,
                "kappa_eff": None if np.isinf(self.kappa_eff) else self.kappa_eff,
                "degenerate": self.degenerate,
                "effective_spectrum": [float(x) for x in self.effective_spectrum],
                "compatible": self.compatible,
                "ground_leakage": self.ground_leakage,
                "r_samples": self.r_samples,
                "l_sample": self.l_sample,
                "seed": self.seed,
            },
            indent=2,
            sort_keys=True,
        )


def estimate_projector(
    gens: GeneratorSet,
    phi: np.ndarray,
    r_samples: int = DEFAULT_R,
    l_sample: int = DEFAULT_L_SAMPLE,
    rng: np.random.Generator | None = None,
) -> HermitianOperator:
    """Average of r rank-1 projectors U_r|Φ⟩⟨Φ|U_r† over approximate-Haar
    subgroup samples; PSD with unit trace."""
    if r_samples < 1:
        raise ValueError("need at least one sample")
    rng = rng if rng is not None else np.random.default_rng()
    d = gens.dim
    pi = np.zeros((d, d), dtype=complex)
    for _ in range(r_samples):
        v = subgroup_haar_apply(gens, phi, l_sample, rng)
        pi += np.outer(v, v.conj())
    return HermitianOperator(pi / r_samples)


def extract_basis(
    pi_hat: HermitianOperator, rank_tol: float = DEFAULT_RANK_TOL
) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the support of the projector estimate.

    Columns are eigenvectors with eigenvalue above rank_tol times the
    largest; rank_tol is relative because the support eigenvalues sit at
    Θ(1/d_eff) with a sharp gap to numerical zero.
    """
    w = pi_hat.spectrum
    if w[-1] <= 0:
        raise ValueError("projector estimate has no positive spectrum")
    keep = w > rank_tol * w[-1]
    d_eff = int(keep.sum())
    if d_eff == 0:
        raise ValueError("all eigenvalues below the rank tolerance")
    return pi_hat.eigvecs[:, keep], d_eff


def effective_spectrum(
    m: HermitianOperator, basis_q: np.ndarray
) -> tuple[np.ndarray, float, bool]:
    """Ascending eigenvalues of Q†MQ, the effective ratio, and a degeneracy flag.

    kappa_eff = (λ'_last − λ'_1)/(λ'_2 − λ'_1); a degenerate effective ground
    level yields the +inf sentinel with the flag raised.
    """
    comp = basis_q.conj().T @ m.matrix @ basis_q
    lam = np.linalg.eigvalsh((comp + comp.conj().T) / 2)
    if len(lam) < 2:
        return lam, KAPPA_DEGENERATE, True
    gap = lam[1] - lam[0]
    if gap <= 1e-12 * max(1.0, lam[-1] - lam[0]):
        return lam, KAPPA_DEGENERATE, True
    return lam, float((lam[-1] - lam[0]) / gap), False


def compress(a: HermitianOperator | np.ndarray, basis_q: np.ndarray) -> HermitianOperator:
    """Q†AQ, the operator restricted to the estimated subspace."""
    mat = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a, dtype=complex)
    comp = basis_q.conj().T @ mat @ basis_q
    return HermitianOperator((comp + comp.conj().T) / 2)


def compatibility_check(
    m: HermitianOperator,
    basis_q: np.ndarray,
    leak_tol: float = DEFAULT_LEAK_TOL,
    degeneracy_tol: float = 1e-12,
) -> tuple[bool, float]:
    """Whether the ground space of M lies inside span(Q), and the leakage.

    Leakage is the largest norm of (I − QQ†)v over ground-space directions v;
    degenerate ground spaces are handled through the full eigenspace.
    """
    w = m.spectrum
    k = int(np.searchsorted(w, w[0] + degeneracy_tol, side="right"))
    gspace = m.eigvecs[:, : max(k, 1)]
    resid = gspace - basis_q @ (basis_q.conj().T @ gspace)
    leakage = float(np.linalg.norm(resid, 2))
    return leakage <= leak_tol, leakage


def estimate_profile(
    gens: GeneratorSet,
    phi: np.ndarray,
    m: HermitianOperator,
    r_samples: int = DEFAULT_R,
    l_sample: int = DEFAULT_L_SAMPLE,
    rng: np.random.Generator | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    leak_tol: float = DEFAULT_LEAK_TOL,
    robustness_pass: bool = True,
    seed: int | None = None,
) -> EffectiveProfile:
    """Full pipeline: estimate the projector, extract the basis, compress M.

    The optional robustness pass doubles R and warns (without failing) if the
    rank estimate changes, which flags under-sampled generator sets.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    pi_hat = estimate_projector(gens, phi, r_samples, l_sample, rng)
    basis_q, d_eff = extract_basis(pi_hat, rank_tol)
    if robustness_pass:
        pi2 = estimate_projector(gens, phi, r_samples, l_sample, rng)
        merged = HermitianOperator((pi_hat.matrix + pi2.matrix) / 2)
        _, d_eff2 = extract_basis(merged, rank_tol)
        if d_eff2 != d_eff:
            warnings.warn(
                f"rank estimate moved from {d_eff} to {d_eff2} when doubling R; "
                "increase r_samples",
                stacklevel=2,
            )
            basis_q, d_eff = extract_basis(merged, rank_tol)
            pi_hat = merged
    lam, kappa, degenerate = effective_spectrum(m, basis_q)
    compatible, leakage = compatibility_check(m, basis_q, leak_tol)
    # input-state leakage should vanish by construction
    phi_resid = float(np.linalg.norm(phi - basis_q @ (basis_q.conj().T @ phi)))
    if phi_resid > 1e-6:
        warnings.warn(f"input state leaks from its own orbit estimate: {phi_resid:.2e}", stacklevel=2)
    return EffectiveProfile(
        pi_hat=pi_hat,
        eigen_decay=pi_hat.spectrum[::-1].copy(),
        basis_q=basis_q,
        d_eff=d_eff,
        effective_spectrum=lam,
        kappa_eff=kappa,
        degenerate=degenerate,
        compatible=compatible,
        ground_leakage=leakage,
        r_samples=r_samples,
        l_sample=l_sample,
        seed=seed,
    )


def full_kappa(m: HermitianOperator) -> tuple[float, bool]:
    """(λ_d − λ₁)/(λ₂ − λ₁) of the full spectrum, with a degeneracy flag."""
    w = m.spectrum
    gap = w[1] - w[0]
    if gap <= 1e-12 * max(1.0, w[-1] - w[0]):
        return KAPPA_DEGENERATE, True
    return float((w[-1] - w[0]) / gap), False


def kappa_scan(
    model_of_param,
    parameter_grid,
    gens: GeneratorSet,
    phi: np.ndarray,
    r_samples: int = DEFAULT_R,
    l_sample: int = DEFAULT_L_SAMPLE,
    rng: np.random.Generator | None = None,
) -> list[dict]:
    """κ and κ_eff across a model-parameter grid.

    The basis is estimated once from (gens, phi) and reused: the invariant
    subspace does not depend on the parameter being scanned.
    """
    rng = rng if rng is not None else np.random.default_rng()
    pi_hat = estimate_projector(gens, phi, r_samples, l_sample, rng)
    basis_q, d_eff = extract_basis(pi_hat)
    rows = []
    for param in parameter_grid:
        m = model_of_param(param)
        kappa, deg_full = full_kappa(m)
        lam, kappa_eff, deg_eff = effective_spectrum(m, basis_q)
        rows.append(
            {
                "param": float(param),
                "kappa": kappa,
                "kappa_eff": kappa_eff,
                "d_eff": d_eff,
                "degenerate_flag": bool(deg_full or deg_eff),
            }
        )
    return rows
