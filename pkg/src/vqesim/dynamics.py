"""Loss, analytic gradients, (noisy) gradient-descent training, the two-copy
projection operator Y, and the reference Riemannian gradient flow."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .ansatz import Ansatz, FullyTrainableAnsatz, PartiallyTrainableAnsatz, suffix_unitaries
from .linalg import HermitianOperator, normalize_state, op_norm_hermitian, swap_operator

GROUND_DEGENERACY_TOL = 1e-12

Y_DIM_LIMIT = 64

STATUS_NAMES = {
    _kernels.STATUS_BUDGET: "step-budget exhausted",
    _kernels.STATUS_CONVERGED: "converged",
    _kernels.STATUS_ABORTED: "aborted",
}


@dataclass
class NoiseSpec:
    """Additive per-component gradient noise.

    ``variance`` is the variance of each i.i.d. Gaussian component drawn
    fresh at every step; kind "none" ignores it.
    """

    kind: str = "none"
    variance: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian_iid"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ValueError("variance must be finite and >= 0")

    def draw(self, rng: np.random.Generator, steps: int, p: int) -> np.ndarray:
        if self.kind == "none" or self.variance == 0.0:
            return np.zeros((0, 0))
        return rng.normal(0.0, np.sqrt(self.variance), size=(steps, p))


NO_NOISE = NoiseSpec()


@dataclass
class VqeInstance:
    """Problem Hamiltonian, input state, and ansatz, with cached ground data."""

    m: HermitianOperator
    input_state: np.ndarray
    ansatz: Ansatz
    degenerate: bool = field(init=False)

    def __post_init__(self):
        self.input_state = normalize_state(self.input_state)
        if self.m.dim != self.ansatz.dim or self.m.dim != self.input_state.shape[0]:
            raise ValueError("dimension mismatch between M, input state, and ansatz")
        w = self.m.spectrum
        self.degenerate = bool(w[1] - w[0] <= GROUND_DEGENERACY_TOL)

    @property
    def spectrum(self) -> np.ndarray:
        return self.m.spectrum

    @property
    def ground_state(self) -> np.ndarray:
        return self.m.eigvecs[:, 0]

    def ground_space(self, tol: float = GROUND_DEGENERACY_TOL) -> np.ndarray:
        """Orthonormal columns spanning the ground eigenspace (one column in
        the non-degenerate case)."""
        w = self.m.spectrum
        k = int(np.searchsorted(w, w[0] + tol, side="right"))
        return self.m.eigvecs[:, : max(k, 1)]


def overlap_error(inst: VqeInstance, psi: np.ndarray) -> float:
    """1 − ‖P_ground ψ‖², against the full ground eigenspace."""
    ov = inst.ground_space().conj().T @ psi
    return 1.0 - float(np.vdot(ov, ov).real)


def loss(inst: VqeInstance, theta: np.ndarray) -> float:
    """⟨Φ|U†(θ) M U(θ)|Φ⟩."""
    psi = inst.ansatz.output_state(theta, inst.input_state)
    return float(np.vdot(psi, inst.m.matrix @ psi).real)


GRAD_IMAG_TOL = 1e-8


def analytic_gradient(inst: VqeInstance, theta: np.ndarray) -> np.ndarray:
    """∂L/∂θ_j = i·tr([M, |Ψ⟩⟨Ψ|]·S_j H_{g(j)} S_j†) with one suffix sweep.

    The trace is purely imaginary in exact arithmetic; the real residue of
    i·tr is the gradient and the imaginary residue is asserted small.
    """
    ans = inst.ansatz
    psi = ans.output_state(theta, inst.input_state)
    mpsi = inst.m.matrix @ psi
    jmat = np.outer(mpsi, psi.conj())
    jmat = jmat - jmat.conj().T
    suff = suffix_unitaries(ans, theta)
    grad = np.empty(ans.p)
    scale = max(op_norm_hermitian(inst.m), 1.0)
    for j, s in enumerate(suff):
        h = ans.gens.generators[ans.generator_of_slot(j)].matrix
        z = 1j * np.einsum("ab,ba->", s.conj().T @ jmat @ s, h)
        if abs(z.imag) > GRAD_IMAG_TOL * scale * ans.gens.dim:
            raise FloatingPointError(
                f"gradient component {j} has imaginary residue {z.imag:.3e}"
            )
        grad[j] = z.real
    return grad


@dataclass
class RecordingPolicy:
    """What a training run keeps: scalar rows every ``stride`` steps, and Y
    snapshots on a geometric-plus-stride schedule when ``track_y``."""

    stride: int = 1
    track_y: bool = False
    y_stride: int | None = None

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def y_steps(self, max_steps: int) -> np.ndarray:
        if not self.track_y:
            return np.zeros(0, dtype=np.int64)
        stride = self.y_stride or max(1, max_steps // 16)
        steps = {0, max_steps - 1}
        k = 1
        while k < max_steps:
            steps.add(k)
            k *= 2
        steps.update(range(0, max_steps, stride))
        return np.array(sorted(steps), dtype=np.int64)


@dataclass
class TrainingTrace:
    """Per-step scalars plus optional Y-deviation snapshots from one run."""

    steps: np.ndarray
    loss: np.ndarray
    overlap_error: np.ndarray
    dtheta_inf: np.ndarray
    dtheta_2: np.ndarray
    y_steps: np.ndarray
    y_dev: np.ndarray
    theta0: np.ndarray
    theta_final: np.ndarray
    steps_run: int
    best_error: float
    status: str

    def write_csv(self, path) -> None:
        """One row per recorded step; dy_op is blank off the Y schedule."""
        ydev = dict(zip(self.y_steps.tolist(), self.y_dev.tolist()))
        with open(path, "w", newline="") as fh:
            fh.write("step,loss,overlap_error,dtheta_inf,dtheta_2,dy_op\n")
            for i, s in enumerate(self.steps.tolist()):
                dy = ydev.get(s, "")
                fh.write(
                    f"{s},{self.loss[i]!r},{self.overlap_error[i]!r},"
                    f"{self.dtheta_inf[i]!r},{self.dtheta_2[i]!r},{dy!r}\n"
                    if dy != ""
                    else f"{s},{self.loss[i]!r},{self.overlap_error[i]!r},"
                    f"{self.dtheta_inf[i]!r},{self.dtheta_2[i]!r},\n"
                )


def _slot_arrays(inst: VqeInstance):
    """Pack the ansatz into the kernel's slot layout."""
    ans = inst.ansatz
    d = ans.dim
    if isinstance(ans, PartiallyTrainableAnsatz):
        h = ans.h
        lam = h.spectrum[None, :].copy()
        vh = h.eigvecs.conj().T[None, :, :].copy()
        hmat = h.matrix[None, :, :].copy()
        gen_of = np.zeros(ans.p, dtype=np.int64)
        av = np.stack([ans.frozen[j + 1] @ h.eigvecs for j in range(ans.p)])
        psi0 = ans.frozen[0] @ inst.input_state
    elif isinstance(ans, FullyTrainableAnsatz):
        gens = ans.gens.generators
        lam = np.stack([g.spectrum for g in gens])
        vh = np.stack([g.eigvecs.conj().T for g in gens])
        hmat = np.stack([g.matrix for g in gens])
        gen_of = np.array([ans.generator_of_slot(j) for j in range(ans.p)], dtype=np.int64)
        av = np.stack([gens[gen_of[j]].eigvecs for j in range(ans.p)])
        psi0 = inst.input_state.astype(complex)
    else:
        raise TypeError(f"unsupported ansatz type {type(ans).__name__}")
    return (
        np.ascontiguousarray(av),
        np.ascontiguousarray(vh),
        np.ascontiguousarray(lam, dtype=float),
        np.ascontiguousarray(hmat),
        gen_of,
        np.ascontiguousarray(inst.m.matrix),
        np.ascontiguousarray(psi0),
    )


def gradient_descent(
    inst: VqeInstance,
    theta0: np.ndarray,
    eta: float,
    max_steps: int,
    noise: NoiseSpec = NO_NOISE,
    record: RecordingPolicy | None = None,
    rng: np.random.Generator | None = None,
    convergence_threshold: float | None = 0.01,
    backend: str | None = None,
) -> TrainingTrace:
    """Iterate θ ← θ − η(∇L + ε) until convergence or the step budget.

    ``convergence_threshold`` is on the overlap error; pass None to always
    run the full budget. Noise requires an rng.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    record = record or RecordingPolicy()
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (inst.ansatz.p,):
        raise ValueError(f"theta0 has shape {theta0.shape}, expected ({inst.ansatz.p},)")
    noise_draws = np.zeros((0, 0))
    if noise.kind != "none" and noise.variance > 0:
        if rng is None:
            raise ValueError("noisy training needs an rng")
        noise_draws = noise.draw(rng, max_steps, inst.ansatz.p)
    av, vh, lam, hmat, gen_of, m, psi0 = _slot_arrays(inst)
    gspace = np.ascontiguousarray(inst.ground_space())
    y_steps = record.y_steps(max_steps)
    thr = -1.0 if convergence_threshold is None else float(convergence_threshold)
    out = _kernels.train_loop(
        av,
        vh,
        lam,
        hmat,
        gen_of,
        m,
        psi0,
        gspace,
        theta0,
        float(eta),
        int(max_steps),
        thr,
        noise_draws,
        int(record.stride),
        y_steps,
        backend=backend,
    )
    steps, losses, errs, dinf, d2, theta_snaps, theta_final, stop_step, best_err, status = out
    n_snaps = theta_snaps.shape[0]
    y_dev = np.zeros(n_snaps)
    if record.track_y and n_snaps:
        y0 = compute_y_of_ansatz(inst.ansatz, theta_snaps[0]).matrix
        for i in range(1, n_snaps):
            yi = compute_y_of_ansatz(inst.ansatz, theta_snaps[i]).matrix
            y_dev[i] = op_norm_hermitian(yi - y0)
    return TrainingTrace(
        steps=steps,
        loss=losses,
        overlap_error=errs,
        dtheta_inf=dinf,
        dtheta_2=d2,
        y_steps=y_steps[:n_snaps],
        y_dev=y_dev,
        theta0=theta0,
        theta_final=theta_final,
        steps_run=int(stop_step),
        best_error=float(best_err),
        status=STATUS_NAMES[int(status)],
    )


def compute_y_of_ansatz(ansatz: Ansatz, theta: np.ndarray) -> HermitianOperator:
    """Y(θ) = (1/p) Σ_j (S_j H_{g(j)} S_j†)^⊗2 / Z(H_{g(j)}, d).

    Guarded to d ≤ 64 because the result is d²×d².
    """
    d = ansatz.dim
    if d > Y_DIM_LIMIT:
        raise ValueError(f"Y is a d²×d² matrix; refusing d = {d} > {Y_DIM_LIMIT}")
    theta = np.asarray(theta, dtype=float)
    y = np.zeros((d * d, d * d), dtype=complex)
    suff = suffix_unitaries(ansatz, theta)
    for j, s in enumerate(suff):
        h = ansatz.gens.generators[ansatz.generator_of_slot(j)].matrix
        z = np.trace(h @ h).real / (d * d - 1)
        hj = s @ h @ s.conj().T
        y += np.kron(hj, hj) / z
    return HermitianOperator(y / ansatz.p)


def compute_Y(inst: VqeInstance, theta: np.ndarray) -> HermitianOperator:
    return compute_y_of_ansatz(inst.ansatz, theta)


def y_star(d: int) -> HermitianOperator:
    """Haar expectation of Y: the swap operator minus I/d."""
    return HermitianOperator(swap_operator(d) - np.eye(d * d) / d)


def deviation_metrics(trace: TrainingTrace) -> tuple[float, float]:
    """(max over snapshots of ‖Y−Y(0)‖_op, max over steps of ‖θ−θ(0)‖_∞)."""
    max_dy = float(trace.y_dev.max()) if trace.y_dev.size else 0.0
    max_dth = float(trace.dtheta_inf.max()) if trace.dtheta_inf.size else 0.0
    return max_dy, max_dth


def rgf_integrate(
    m: HermitianOperator, psi0: np.ndarray, dt: float, t_max: float
) -> tuple[np.ndarray, np.ndarray]:
    """Euler-integrate d|Ψ⟩/dt = −[M, |Ψ⟩⟨Ψ|]|Ψ⟩ with renormalization.

    Returns (times, overlap errors against the ground space of M).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    mat = m.matrix
    w = m.spectrum
    k = int(np.searchsorted(w, w[0] + GROUND_DEGENERACY_TOL, side="right"))
    gspace = m.eigvecs[:, : max(k, 1)]
    psi = normalize_state(psi0)
    n_steps = int(round(t_max / dt))
    times = np.empty(n_steps + 1)
    errors = np.empty(n_steps + 1)
    for i in range(n_steps + 1):
        ov = gspace.conj().T @ psi
        times[i] = i * dt
        errors[i] = 1.0 - float(np.vdot(ov, ov).real)
        if i == n_steps:
            break
        mpsi = mat @ psi
        expect = float(np.vdot(psi, mpsi).real)
        psi = normalize_state(psi - dt * (mpsi - expect * psi))
    return times, errors
