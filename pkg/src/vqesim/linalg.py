"""Dense complex linear algebra primitives for state spaces up to d=1024."""

from __future__ import annotations

import numpy as np

HERMITICITY_RTOL = 1e-10


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A†)/2."""
    return (a + a.conj().T) / 2


def check_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> None:
    """Raise NonHermitianError if ``a`` deviates from A† by more than rtol·‖A‖."""
    scale = op_norm(a)
    dev = op_norm(a - a.conj().T)
    if dev > rtol * max(scale, 1e-300):
        raise NonHermitianError(
            f"matrix is not Hermitian: ‖A - A†‖ = {dev:.3e} > {rtol:.0e}·‖A‖ = {rtol * scale:.3e}"
        )


class HermitianOperator:
    """A dense Hermitian matrix with lazily cached spectral data.

    The stored matrix is symmetrized once at construction to absorb float
    round-off; construction rejects inputs that are not Hermitian within
    ``HERMITICITY_RTOL``. ``spectrum`` is ascending.
    """

    __slots__ = ("matrix", "_spectrum", "_eigvecs")

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        check_hermitian(matrix)
        self.matrix = hermitize(matrix)
        self._spectrum = None
        self._eigvecs = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _decompose(self) -> None:
        if self._spectrum is None:
            self._spectrum, self._eigvecs = np.linalg.eigh(self.matrix)

    @property
    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues."""
        self._decompose()
        return self._spectrum

    @property
    def eigvecs(self) -> np.ndarray:
        """Unitary of eigenvectors, columns matching ``spectrum``."""
        self._decompose()
        return self._eigvecs

    def expm(self, theta: float) -> np.ndarray:
        """exp(-i·theta·A) through the cached eigendecomposition."""
        self._decompose()
        v = self._eigvecs
        return (v * np.exp(-1j * theta * self._spectrum)[None, :]) @ v.conj().T

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


def as_matrix(a) -> np.ndarray:
    """Accept either an ndarray or a HermitianOperator."""
    return a.matrix if isinstance(a, HermitianOperator) else np.asarray(a, dtype=complex)


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending eigenvalues and the unitary of eigenvectors, so that
    A = V·diag(w)·V†. Rejects non-Hermitian input.
    """
    a = as_matrix(a)
    check_hermitian(a)
    return np.linalg.eigh(hermitize(a))


def unitary_exp(h, theta: float) -> np.ndarray:
    """exp(-i·theta·H) for Hermitian H, via eigendecomposition."""
    if isinstance(h, HermitianOperator):
        return h.expm(theta)
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * theta * w)[None, :]) @ v.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product A ⊗ B."""
    return np.kron(a, b)


def partial_trace_first(a: np.ndarray, d: int) -> np.ndarray:
    """Partial trace over the first tensor factor of a d²×d² matrix.

    Satisfies tr₁(X ⊗ Y) = tr(X)·Y.
    """
    a = np.asarray(a)
    if a.shape != (d * d, d * d):
        raise ValueError(f"expected shape {(d * d, d * d)}, got {a.shape}")
    return np.einsum("ikil->kl", a.reshape(d, d, d, d))


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = as_matrix(a)
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def op_norm_hermitian(a: np.ndarray) -> float:
    """Largest |eigenvalue| of a Hermitian matrix (faster than SVD)."""
    w = np.linalg.eigvalsh(as_matrix(a))
    return float(np.abs(w).max()) if w.size else 0.0


def fro_norm(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(as_matrix(a)))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    a = as_matrix(a)
    return float(np.linalg.norm(a, "nuc")) if a.size else 0.0


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a Haar-distributed element of SU(d).

    QR of a complex Ginibre matrix with the triangular factor rephased to a
    real positive diagonal (without that correction the output is not Haar),
    then the global phase is divided out so det(U) = 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    a = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))[None, :]
    det = np.linalg.det(q)
    return q / det ** (1.0 / d)


def normalize_state(v: np.ndarray) -> np.ndarray:
    """Return v/‖v‖ as a complex vector."""
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


def swap_operator(d: int) -> np.ndarray:
    """The d²×d² operator W with W·(x ⊗ y) = y ⊗ x; entries are 0/1."""
    if d < 1:
        raise ValueError("d must be >= 1")
    w = np.zeros((d, d, d, d))
    idx = np.arange(d)
    w[idx[:, None], idx[None, :], idx[None, :], idx[:, None]] = 1.0
    return w.reshape(d * d, d * d).astype(complex)
