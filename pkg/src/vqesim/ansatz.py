"""Fully- and partially-trainable ansatz circuits over a generator set.

Both families share one evaluation layout: a sequence of p slots, each
applying an optional frozen unitary times a generator rotation. Slot j of
the fully-trainable ansatz rotates generator j mod K (layer-major order,
generator index as the inner loop); every slot of the partially-trainable
ansatz rotates the single chosen generator, sandwiched between frozen
unitaries drawn once at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import GeneratorSet
from .linalg import haar_unitary


def subgroup_haar_apply(
    gens: GeneratorSet, vec: np.ndarray, l_sample: int, rng: np.random.Generator
) -> np.ndarray:
    """Apply one approximate-Haar sample of the generated subgroup to a vector.

    The sample is a product of ``l_sample`` layers of all K generator
    rotations with angles i.i.d. uniform on [0, 2π); layer 1, generator 1
    acts first. Angles are drawn in the same order as subgroup_haar_sample,
    so identical rng states give the same group element.
    """
    v = np.asarray(vec, dtype=complex)
    for _ in range(l_sample):
        for h in gens.generators:
            ang = rng.uniform(0.0, 2.0 * np.pi)
            v = h.eigvecs @ (np.exp(-1j * ang * h.spectrum) * (h.eigvecs.conj().T @ v))
    return v


def subgroup_haar_sample(
    gens: GeneratorSet, l_sample: int, rng: np.random.Generator
) -> np.ndarray:
    """One approximate-Haar sample of the subgroup generated by ``gens``.

    Empty products (l_sample = 0) give the identity.
    """
    d = gens.dim
    u = np.eye(d, dtype=complex)
    for _ in range(l_sample):
        for h in gens.generators:
            ang = rng.uniform(0.0, 2.0 * np.pi)
            u = h.eigvecs @ (np.exp(-1j * ang * h.spectrum)[:, None] * (h.eigvecs.conj().T @ u))
    return u


@dataclass
class FullyTrainableAnsatz:
    """L layers of K generator rotations; p = K·L parameters.

    theta is flat with the generator index as the inner loop:
    theta[(l-1)*K + (k-1)] is the angle of generator k in layer l.
    """

    gens: GeneratorSet
    layers: int

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("need at least one layer")

    @property
    def p(self) -> int:
        return self.gens.size * self.layers

    @property
    def dim(self) -> int:
        return self.gens.dim

    def generator_of_slot(self, j: int) -> int:
        return j % self.gens.size

    def slot_unitary(self, j: int, theta_j: float) -> np.ndarray:
        return self.gens.generators[self.generator_of_slot(j)].expm(theta_j)

    def apply(self, theta: np.ndarray) -> np.ndarray:
        """U(theta) as a dense matrix; slot 0 is applied first."""
        theta = _check_theta(theta, self.p)
        u = np.eye(self.dim, dtype=complex)
        for j in range(self.p):
            u = self.slot_unitary(j, theta[j]) @ u
        return u

    def output_state(self, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        theta = _check_theta(theta, self.p)
        v = np.asarray(phi, dtype=complex)
        for j in range(self.p):
            h = self.gens.generators[self.generator_of_slot(j)]
            v = h.eigvecs @ (np.exp(-1j * theta[j] * h.spectrum) * (h.eigvecs.conj().T @ v))
        return v

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2.0 * np.pi, size=self.p)


@dataclass
class PartiallyTrainableAnsatz:
    """p rotations of one generator interleaved with p+1 frozen unitaries.

    U(theta) = U_p·exp(-iθ_p H)···U_1·exp(-iθ_1 H)·U_0 with frozen[l] = U_l.
    """

    gens: GeneratorSet
    h_index: int
    frozen: list[np.ndarray] = field(repr=False)
    sampler_depth: int = 20

    def __post_init__(self):
        if not (0 <= self.h_index < self.gens.size):
            raise ValueError(f"h_index {self.h_index} out of range for K={self.gens.size}")
        if len(self.frozen) < 2:
            raise ValueError("need p+1 >= 2 frozen unitaries")

    @property
    def p(self) -> int:
        return len(self.frozen) - 1

    @property
    def dim(self) -> int:
        return self.gens.dim

    @property
    def h(self):
        return self.gens.generators[self.h_index]

    def generator_of_slot(self, j: int) -> int:
        return self.h_index

    def slot_unitary(self, j: int, theta_j: float) -> np.ndarray:
        return self.frozen[j + 1] @ self.h.expm(theta_j)

    def apply(self, theta: np.ndarray) -> np.ndarray:
        theta = _check_theta(theta, self.p)
        u = self.frozen[0]
        for j in range(self.p):
            u = self.slot_unitary(j, theta[j]) @ u
        return u

    def output_state(self, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        theta = _check_theta(theta, self.p)
        h = self.h
        v = self.frozen[0] @ np.asarray(phi, dtype=complex)
        for j in range(self.p):
            v = h.eigvecs @ (np.exp(-1j * theta[j] * h.spectrum) * (h.eigvecs.conj().T @ v))
            v = self.frozen[j + 1] @ v
        return v

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        # the U(theta) distribution is initialization-independent; zeros keep
        # deviation tracking anchored at the frozen product
        return np.zeros(self.p)


Ansatz = FullyTrainableAnsatz | PartiallyTrainableAnsatz


def build_partially_trainable(
    gens: GeneratorSet,
    h_index: int,
    p: int,
    l_sample: int,
    rng: np.random.Generator,
) -> PartiallyTrainableAnsatz:
    """Draw p+1 frozen unitaries and assemble a partially-trainable ansatz.

    Frozen unitaries come from the random-walk surrogate of the subgroup Haar
    measure, or directly from SU(d) Haar when the set is flagged universal.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if gens.universal:
        frozen = [haar_unitary(gens.dim, rng) for _ in range(p + 1)]
    else:
        frozen = [subgroup_haar_sample(gens, l_sample, rng) for _ in range(p + 1)]
    return PartiallyTrainableAnsatz(gens, h_index, frozen, sampler_depth=l_sample)


def from_frozen(gens: GeneratorSet, h_index: int, frozen: list[np.ndarray]) -> PartiallyTrainableAnsatz:
    """Partially-trainable ansatz over an externally supplied frozen list
    (synthetic embedded instances)."""
    return PartiallyTrainableAnsatz(gens, h_index, list(frozen))


def apply(ansatz: Ansatz, theta: np.ndarray) -> np.ndarray:
    return ansatz.apply(theta)


def output_state(ansatz: Ansatz, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return ansatz.output_state(theta, phi)


def suffix_unitaries(ansatz: Ansatz, theta: np.ndarray) -> list[np.ndarray]:
    """Products of the last slots: entry j is slot_{p-1}···slot_j.

    One right-to-left sweep, O(p) matrix products. Entry 0 equals
    apply(theta) up to the U_0 factor of the partially-trainable family.
    """
    theta = _check_theta(theta, ansatz.p)
    out = [None] * ansatz.p
    s = np.eye(ansatz.dim, dtype=complex)
    for j in range(ansatz.p - 1, -1, -1):
        s = s @ ansatz.slot_unitary(j, theta[j])
        out[j] = s
    return out


def _check_theta(theta, p: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (p,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({p},)")
    return theta
