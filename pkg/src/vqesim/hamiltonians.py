"""Spin-chain Hamiltonians, ansatz generator sets, and synthetic embedded instances.

Conventions: qubit 0 is the leftmost tensor factor; chains are periodic
(qubit n is identified with qubit 0). Generator sets are normalized so that
tr(H²)/(d²−1) = 1 for every generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import HermitianOperator, haar_unitary, normalize_state

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

MAX_QUBITS = 12


@dataclass(frozen=True)
class PauliString:
    """A coefficient times a tensor product of single-qubit Paulis."""

    factors: str
    coefficient: float = 1.0

    @property
    def n_qubits(self) -> int:
        return len(self.factors)


def pauli_string_matrix(s: PauliString) -> HermitianOperator:
    """Dense matrix of a Pauli string, qubit 0 leftmost."""
    if s.n_qubits == 0 or s.n_qubits > MAX_QUBITS:
        raise ValueError(f"need 1..{MAX_QUBITS} qubits, got {s.n_qubits}")
    unknown = set(s.factors) - set("IXYZ")
    if unknown:
        raise ValueError(f"unknown Pauli labels: {sorted(unknown)}")
    m = _PAULIS[s.factors[0]]
    for c in s.factors[1:]:
        m = np.kron(m, _PAULIS[c])
    return HermitianOperator(s.coefficient * m)


def _site(op: str, i: int, n: int) -> np.ndarray:
    labels = ["I"] * n
    labels[i] = op
    return pauli_string_matrix(PauliString("".join(labels))).matrix


def _bond(op: str, i: int, j: int, n: int) -> np.ndarray:
    labels = ["I"] * n
    labels[i] = op
    labels[j] = op
    return pauli_string_matrix(PauliString("".join(labels))).matrix


def tfi1d(n: int, g: float) -> HermitianOperator:
    """Transverse-field Ising chain: Σᵢ XᵢXᵢ₊₁ + g Σᵢ Zᵢ, periodic."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    m = sum(_bond("X", i, (i + 1) % n, n) for i in range(n))
    m = m + g * sum(_site("Z", i, n) for i in range(n))
    return HermitianOperator(m)


def xxz1d(n: int, j_zz: float) -> HermitianOperator:
    """Heisenberg XXZ chain: Σᵢ XᵢXᵢ₊₁ + YᵢYᵢ₊₁ + J_zz Σᵢ ZᵢZᵢ₊₁, periodic."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of qubits >= 2")
    m = sum(_bond("X", i, (i + 1) % n, n) + _bond("Y", i, (i + 1) % n, n) for i in range(n))
    m = m + j_zz * sum(_bond("Z", i, (i + 1) % n, n) for i in range(n))
    return HermitianOperator(m)


KITAEV_EDGES_X = ((0, 1), (2, 3))
KITAEV_EDGES_Y = ((1, 2), (0, 3))
KITAEV_EDGES_Z = ((4, 0), (1, 5), (3, 7), (2, 6))


def kitaev8(j_xy: float, h: float) -> HermitianOperator:
    """8-qubit square-octagon Kitaev model with a uniform external field."""
    n = 8
    m = sum(_bond("Z", u, v, n) for u, v in KITAEV_EDGES_Z)
    m = m + (j_xy / np.sqrt(2)) * (
        sum(_bond("X", u, v, n) for u, v in KITAEV_EDGES_X)
        + sum(_bond("Y", u, v, n) for u, v in KITAEV_EDGES_Y)
    )
    m = m + h * sum(_site("X", i, n) + _site("Y", i, n) + _site("Z", i, n) for i in range(n))
    return HermitianOperator(m)


def m_hea(n: int) -> HermitianOperator:
    """Diagonal benchmark Hamiltonian diag(0, 0.5, 1, ..., 1) on n qubits."""
    if n < 1:
        raise ValueError("need at least 1 qubit")
    diag = np.ones(2**n)
    diag[0] = 0.0
    diag[1] = 0.5
    return HermitianOperator(np.diag(diag).astype(complex))


def normalize_generator(h: np.ndarray) -> np.ndarray:
    """Rescale a traceless Hermitian so that tr(H²) = d²−1."""
    d = h.shape[0]
    t2 = float(np.trace(h @ h).real)
    if t2 <= 0:
        raise ValueError("cannot normalize a zero generator")
    return h * np.sqrt((d * d - 1) / t2)


@dataclass
class GeneratorSet:
    """A named set of normalized traceless Hermitians defining an ansatz.

    ``universal`` marks sets whose generated group is all of SU(d), enabling
    direct Haar sampling of frozen unitaries instead of the random-walk
    surrogate. It is opt-in and never auto-detected.
    """

    generators: list[HermitianOperator]
    labels: list[str]
    name: str = ""
    normalized: bool = True
    universal: bool = False

    def __post_init__(self):
        dims = {h.dim for h in self.generators}
        if len(dims) != 1:
            raise ValueError(f"generators disagree on dimension: {sorted(dims)}")
        for h, lab in zip(self.generators, self.labels):
            tr = abs(np.trace(h.matrix))
            if tr > 1e-8:
                raise ValueError(f"generator {lab} is not traceless: |tr| = {tr:.2e}")
            if self.normalized:
                z = np.trace(h.matrix @ h.matrix).real / (h.dim**2 - 1)
                if abs(z - 1.0) > 1e-8:
                    raise ValueError(f"generator {lab} is not normalized: Z = {z}")

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    @property
    def size(self) -> int:
        return len(self.generators)


def _make_set(name: str, terms: list[tuple[str, np.ndarray]], universal: bool = False) -> GeneratorSet:
    gens = [HermitianOperator(normalize_generator(h)) for _, h in terms]
    return GeneratorSet(gens, [lab for lab, _ in terms], name=name, universal=universal)


def _even_bonds(n: int):
    return [(i, (i + 1) % n) for i in range(0, n, 2)]


def _odd_bonds(n: int):
    return [(i, (i + 1) % n) for i in range(1, n, 2)]


def tfi2(n: int) -> GeneratorSet:
    """Two-generator TFI ansatz: {Σ XX, Σ Z}."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    hxx = sum(_bond("X", i, (i + 1) % n, n) for i in range(n))
    hz = sum(_site("Z", i, n) for i in range(n))
    return _make_set(f"tfi2({n})", [("sum_xx", hxx), ("sum_z", hz)])


def tfi3(n: int) -> GeneratorSet:
    """Three-generator TFI ansatz splitting even and odd X-couplings."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of qubits (even/odd bond split)")
    hxe = sum(_bond("X", u, v, n) for u, v in _even_bonds(n))
    hxo = sum(_bond("X", u, v, n) for u, v in _odd_bonds(n))
    hz = sum(_site("Z", i, n) for i in range(n))
    return _make_set(f"tfi3({n})", [("xx_even", hxe), ("xx_odd", hxo), ("sum_z", hz)])


def xxz4(n: int) -> GeneratorSet:
    """Four-generator XXZ ansatz: even/odd (XX+YY), even/odd ZZ."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of qubits (even/odd bond split)")
    terms = [
        ("xy_even", sum(_bond("X", u, v, n) + _bond("Y", u, v, n) for u, v in _even_bonds(n))),
        ("xy_odd", sum(_bond("X", u, v, n) + _bond("Y", u, v, n) for u, v in _odd_bonds(n))),
        ("zz_even", sum(_bond("Z", u, v, n) for u, v in _even_bonds(n))),
        ("zz_odd", sum(_bond("Z", u, v, n) for u, v in _odd_bonds(n))),
    ]
    return _make_set(f"xxz4({n})", terms)


def xxz6(n: int) -> GeneratorSet:
    """Six-generator XXZ ansatz with X, Y, Z couplings split by bond parity."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of qubits (even/odd bond split)")
    terms = []
    for op in "XYZ":
        terms.append((f"{op.lower()}{op.lower()}_even", sum(_bond(op, u, v, n) for u, v in _even_bonds(n))))
        terms.append((f"{op.lower()}{op.lower()}_odd", sum(_bond(op, u, v, n) for u, v in _odd_bonds(n))))
    return _make_set(f"xxz6({n})", terms)


def kitaev_hva() -> GeneratorSet:
    """HVA for the 8-qubit Kitaev model: edge-set couplings plus uniform fields."""
    n = 8
    terms = [
        ("xx_edges", sum(_bond("X", u, v, n) for u, v in KITAEV_EDGES_X)),
        ("yy_edges", sum(_bond("Y", u, v, n) for u, v in KITAEV_EDGES_Y)),
        ("zz_edges", sum(_bond("Z", u, v, n) for u, v in KITAEV_EDGES_Z)),
        ("sum_x", sum(_site("X", i, n) for i in range(n))),
        ("sum_y", sum(_site("Y", i, n) for i in range(n))),
        ("sum_z", sum(_site("Z", i, n) for i in range(n))),
    ]
    return _make_set("kitaev_hva", terms)


def cz_entangler(n: int) -> np.ndarray:
    """Layer of CZ gates on odd bonds then even bonds, periodic wrap.

    CZ gates are diagonal and commute, so the order within the layer is
    immaterial; the product order follows the circuit definition.
    """
    d = 2**n
    diag = np.ones(d)
    for i in list(range(1, n, 2)) + list(range(0, n, 2)):
        j = (i + 1) % n
        for b in range(d):
            if (b >> (n - 1 - i)) & 1 and (b >> (n - 1 - j)) & 1:
                diag[b] = -diag[b]
    return np.diag(diag).astype(complex)


def hea_cz(n: int) -> GeneratorSet:
    """Hardware-efficient ansatz generators: per-qubit X, Y rotations plus their
    CZ-layer conjugates, K = 4n in total."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    ucz = cz_entangler(n)
    terms = []
    for i in range(n):
        x = _site("X", i, n)
        y = _site("Y", i, n)
        terms.append((f"x{i}", x))
        terms.append((f"y{i}", y))
        terms.append((f"cz_x{i}", ucz @ x @ ucz))
        terms.append((f"cz_y{i}", ucz @ y @ ucz))
    return _make_set(f"hea_cz({n})", terms)


def uniform_state(n: int) -> np.ndarray:
    """(1/√2ⁿ)(1, 1, ..., 1)."""
    d = 2**n
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def zero_state(n: int) -> np.ndarray:
    """|0...0⟩."""
    d = 2**n
    v = np.zeros(d, dtype=complex)
    v[0] = 1.0
    return v


def singlet_state(n: int) -> np.ndarray:
    """Product of singlets (|01⟩ − |10⟩)/√2 on the even bonds (0,1), (2,3), ...

    The ground state of the even-bond Heisenberg coupling; it seeds the
    invariant subspace reached by the XXZ ansatz families.
    """
    if n < 2 or n % 2:
        raise ValueError("need an even number of qubits")
    s = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    v = s
    for _ in range(n // 2 - 1):
        v = np.kron(v, s)
    return v


@dataclass
class SyntheticInstance:
    """A d_eff-dimensional problem embedded into a d-dimensional space.

    The problem Hamiltonian has spectrum {0, 1/κ_eff, 1, ..., 1} on the
    embedded subspace and is the identity on its orthogonal complement; the
    generator and all frozen unitaries act trivially on the complement.
    ``frozen_unitaries`` holds p+1 matrices (U₀ first).
    """

    d: int
    d_eff: int
    kappa_eff: float
    m: HermitianOperator
    h: HermitianOperator
    frozen_unitaries: list[np.ndarray]
    input_state: np.ndarray
    embedding: np.ndarray = field(repr=False)


def gue_traceless(d: int, rng: np.random.Generator) -> np.ndarray:
    """Traceless Hermitian from the Gaussian unitary ensemble, normalized to
    tr(H²) = d²−1."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (a + a.conj().T) / 2
    h -= np.trace(h).real / d * np.eye(d)
    return normalize_generator(h)


def make_synthetic(
    d: int, d_eff: int, kappa_eff: float, p: int, rng: np.random.Generator
) -> SyntheticInstance:
    """Build a synthetic instance with controlled (d, d_eff, κ_eff).

    The embedded block spectrum is (0, 1/κ_eff, 1, ..., 1); the subspace
    generator is GUE-drawn and normalized on the block; the p+1 frozen
    unitaries are Haar on SU(d_eff), all padded with the identity complement.
    """
    if not (2 <= d_eff <= d):
        raise ValueError("need 2 <= d_eff <= d")
    if kappa_eff < 1:
        raise ValueError("kappa_eff must be >= 1")
    if p < 1:
        raise ValueError("p must be >= 1")
    spec = np.ones(d_eff)
    spec[0] = 0.0
    spec[1] = 1.0 / kappa_eff
    basis = haar_unitary(d_eff, rng)
    m_block = (basis * spec[None, :]) @ basis.conj().T

    h_block = gue_traceless(d_eff, rng)

    u_embed = haar_unitary(d, rng)
    q = u_embed[:, :d_eff]
    q_perp = u_embed[:, d_eff:]
    complement = q_perp @ q_perp.conj().T

    m = q @ m_block @ q.conj().T + complement
    h = q @ h_block @ q.conj().T
    frozen = [q @ haar_unitary(d_eff, rng) @ q.conj().T + complement for _ in range(p + 1)]
    x = rng.standard_normal(d_eff) + 1j * rng.standard_normal(d_eff)
    phi = normalize_state(q @ x)
    return SyntheticInstance(
        d=d,
        d_eff=d_eff,
        kappa_eff=kappa_eff,
        m=HermitianOperator(m),
        h=HermitianOperator(h),
        frozen_unitaries=frozen,
        input_state=phi,
        embedding=u_embed,
    )


MODEL_FAMILIES = ("tfi1d", "xxz1d", "kitaev8", "m_hea", "synthetic")


def model_matrix(family: str, **params) -> HermitianOperator:
    """Problem Hamiltonian by family name; see MODEL_FAMILIES."""
    if family == "tfi1d":
        return tfi1d(params["n"], params["g"])
    if family == "xxz1d":
        return xxz1d(params["n"], params["j_zz"])
    if family == "kitaev8":
        return kitaev8(params["j_xy"], params["h"])
    if family == "m_hea":
        return m_hea(params["n"])
    raise ValueError(f"unknown model family {family!r}")


GENERATOR_SETS = ("tfi2", "tfi3", "xxz4", "xxz6", "kitaev_hva", "hea_cz")


def generator_set(name: str, n: int | None = None) -> GeneratorSet:
    """Generator set by name; ``n`` is ignored for the fixed-size Kitaev set."""
    if name == "kitaev_hva":
        return kitaev_hva()
    builders = {"tfi2": tfi2, "tfi3": tfi3, "xxz4": xxz4, "xxz6": xxz6, "hea_cz": hea_cz}
    if name not in builders:
        raise ValueError(f"unknown generator set {name!r}")
    if n is None:
        raise ValueError(f"generator set {name!r} needs a qubit count")
    return builders[name](n)


INPUT_STATES = ("uniform", "zero", "singlet")


def input_state(kind: str, n: int) -> np.ndarray:
    if kind == "uniform":
        return uniform_state(n)
    if kind == "zero":
        return zero_state(n)
    if kind == "singlet":
        return singlet_state(n)
    raise ValueError(f"unknown input state {kind!r}")


def default_input_state(family: str) -> str:
    """Per-family default input: |0...0⟩ for TFI/Kitaev/HEA benchmarks, the
    even-bond singlet product for XXZ."""
    return {"tfi1d": "zero", "xxz1d": "singlet", "kitaev8": "zero", "m_hea": "zero"}[family]


def model_to_json(family: str, params: dict) -> str:
    """Serializable description of a model (family name + parameters)."""
    return json.dumps({"family": family, "params": params}, sort_keys=True)


def dump_matrix(path, a: np.ndarray) -> None:
    """Write a dense matrix as little-endian complex doubles, row-major."""
    with open(path, "wb") as fh:
        np.ascontiguousarray(a, dtype=complex).astype("<c16").tofile(fh)
