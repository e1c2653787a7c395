"""Seeded Monte-Carlo sweeps: success rates, over-parameterization thresholds,
deviation scaling, and ansatz comparisons.

Every trial derives its own rng from (base_seed, p, trial) through a
SeedSequence spawn key, so results are bit-identical across runs and across
worker counts; aggregation is keyed by (p, trial).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import ansatz as anz
from . import dynamics as dyn
from . import hamiltonians as ham
from .effective import estimate_profile
from .linalg import HermitianOperator


@dataclass
class ModelSpec:
    """Model family plus its parameters (see hamiltonians.MODEL_FAMILIES)."""

    family: str
    params: dict = field(default_factory=dict)

    def build(self) -> HermitianOperator:
        return ham.model_matrix(self.family, **self.params)

    @property
    def n_qubits(self) -> int:
        if self.family == "kitaev8":
            return 8
        return int(self.params["n"])


@dataclass
class AnsatzSpec:
    """Generator set, trainability mode, and sampling choices."""

    set_name: str
    mode: str = "partially_trainable"
    h_index: int = 0
    l_sample: int = 20

    def __post_init__(self):
        if self.mode not in ("partially_trainable", "fully_trainable"):
            raise ValueError(f"unknown ansatz mode {self.mode!r}")

    def generator_set(self, n: int | None) -> ham.GeneratorSet:
        return ham.generator_set(self.set_name, n)


@dataclass
class SweepConfig:
    """One sweep over the parameter counts of a (model, ansatz) pair."""

    model: ModelSpec
    ansatz: AnsatzSpec
    p_grid: list[int]
    trials_per_p: int = 100
    eta_c: float = 1e-2
    max_steps: int = 10_000
    success_threshold: float = 0.01
    success_rate_bar: float = 0.98
    noise: dyn.NoiseSpec = field(default_factory=dyn.NoiseSpec)
    base_seed: int = 0
    input_state: str | None = None
    track_y: bool = False
    record_stride: int = 50
    convergence_stop: bool = True
    # optional per-trial trace consumer, called as trace_sink(p, trial, trace);
    # excluded from manifests (not part of the sweep definition)
    trace_sink: object = None

    def __post_init__(self):
        self.p_grid = [int(p) for p in self.p_grid]
        if sorted(self.p_grid) != self.p_grid:
            raise ValueError("p_grid must be ascending")
        if self.trials_per_p < 1:
            raise ValueError("need at least one trial per p")

    def input_kind(self) -> str:
        return self.input_state or ham.default_input_state(self.model.family)

    def to_manifest(self) -> dict:
        d = asdict(self)
        d["input_state"] = self.input_kind()
        d.pop("trace_sink", None)
        return d


@dataclass
class TrialRecord:
    p: int
    trial: int
    seed_key: str
    success: bool
    best_error: float
    final_loss: float
    steps_run: int
    status: str
    max_dy: float = float("nan")
    max_dtheta_inf: float = float("nan")


@dataclass
class ThresholdResult:
    p_grid: list[int]
    successes: list[int]
    trials: list[int]
    threshold_p: int | None
    records: list[TrialRecord]

    def rate(self, p: int) -> float:
        i = self.p_grid.index(p)
        return self.successes[i] / self.trials[i]

    def monotonicity_flags(self, z_bar: float = 3.0) -> list[dict]:
        """Grid points where the success rate drops from the previous point
        by more than z_bar pooled binomial standard deviations.

        Rates are expected to be non-decreasing in p up to sampling noise;
        flagged drops are reported, not failed.
        """
        flags = []
        for i in range(1, len(self.p_grid)):
            s0, n0 = self.successes[i - 1], self.trials[i - 1]
            s1, n1 = self.successes[i], self.trials[i]
            r0, r1 = s0 / n0, s1 / n1
            if r1 >= r0:
                continue
            pooled = (s0 + s1) / (n0 + n1)
            var = pooled * (1 - pooled) * (1 / n0 + 1 / n1)
            z = (r0 - r1) / np.sqrt(var) if var > 0 else np.inf
            if z > z_bar:
                flags.append({"p_prev": self.p_grid[i - 1], "p": self.p_grid[i], "z": float(z)})
        return flags


def trial_rng(base_seed: int, p: int, trial: int) -> np.random.Generator:
    """Deterministic per-trial generator, independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(p, trial)))


def build_instance(config: SweepConfig, p: int, rng: np.random.Generator):
    """Fresh model/ansatz/theta0 for one trial."""
    family = config.model.family
    if family == "synthetic":
        pr = config.model.params
        synth = ham.make_synthetic(int(pr["d"]), int(pr["d_eff"]), float(pr["kappa_eff"]), p, rng)
        gens = ham.GeneratorSet([synth.h], ["embedded"], name="synthetic", normalized=False)
        ansatz = anz.from_frozen(gens, 0, synth.frozen_unitaries)
        inst = dyn.VqeInstance(synth.m, synth.input_state, ansatz)
        return inst, ansatz.initial_theta(rng)
    m = config.model.build()
    n = config.model.n_qubits
    gens = config.ansatz.generator_set(n)
    phi = ham.input_state(config.input_kind(), n)
    if config.ansatz.mode == "fully_trainable":
        if p % gens.size:
            raise ValueError(f"p={p} is not a multiple of K={gens.size} for the fully-trainable mode")
        ansatz = anz.FullyTrainableAnsatz(gens, p // gens.size)
    else:
        ansatz = anz.build_partially_trainable(gens, config.ansatz.h_index, p, config.ansatz.l_sample, rng)
    inst = dyn.VqeInstance(m, phi, ansatz)
    return inst, ansatz.initial_theta(rng)


def run_trial(config: SweepConfig, p: int, trial: int) -> TrialRecord:
    """One independent training run; aborted runs count as failures."""
    rng = trial_rng(config.base_seed, p, trial)
    seed_key = f"{config.base_seed}/{p}/{trial}"
    try:
        inst, theta0 = build_instance(config, p, rng)
        record = dyn.RecordingPolicy(stride=config.record_stride, track_y=config.track_y)
        trace = dyn.gradient_descent(
            inst,
            theta0,
            config.eta_c / p,
            config.max_steps,
            noise=config.noise,
            record=record,
            rng=rng,
            convergence_threshold=config.success_threshold if config.convergence_stop else None,
        )
    except FloatingPointError as exc:
        return TrialRecord(p, trial, seed_key, False, float("nan"), float("nan"), 0, f"aborted: {exc}")
    if config.trace_sink is not None:
        config.trace_sink(p, trial, trace)
    max_dy, max_dth = dyn.deviation_metrics(trace)
    return TrialRecord(
        p=p,
        trial=trial,
        seed_key=seed_key,
        success=bool(trace.best_error < config.success_threshold),
        best_error=trace.best_error,
        final_loss=float(trace.loss[-1]) if trace.loss.size else float("nan"),
        steps_run=trace.steps_run,
        status=trace.status,
        max_dy=max_dy if config.track_y else float("nan"),
        max_dtheta_inf=max_dth,
    )


def _run_trials(config: SweepConfig, p: int, workers: int) -> list[TrialRecord]:
    trials = range(config.trials_per_p)
    if workers <= 1:
        recs = [run_trial(config, p, t) for t in trials]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(lambda t: run_trial(config, p, t), trials))
    return sorted(recs, key=lambda r: r.trial)


def success_rate(config: SweepConfig, p: int, workers: int = 1) -> tuple[float, list[TrialRecord]]:
    """Fraction of trials reaching overlap error below the success threshold."""
    recs = _run_trials(config, p, workers)
    return sum(r.success for r in recs) / len(recs), recs


def threshold_sweep(config: SweepConfig, workers: int = 1, progress=None) -> ThresholdResult:
    """Scan the p grid; the threshold is the first p meeting the rate bar."""
    successes, trials, records = [], [], []
    threshold_p = None
    for p in config.p_grid:
        rate, recs = success_rate(config, p, workers)
        successes.append(sum(r.success for r in recs))
        trials.append(len(recs))
        records.extend(recs)
        if progress:
            progress(f"p={p}: rate={rate:.3f} ({successes[-1]}/{trials[-1]})")
        if threshold_p is None and rate >= config.success_rate_bar:
            threshold_p = p
    return ThresholdResult(list(config.p_grid), successes, trials, threshold_p, records)


@dataclass
class DeviationRow:
    p: int
    mean_max_dy: float
    std_max_dy: float
    mean_max_dtheta_inf: float
    std_max_dtheta_inf: float


@dataclass
class DeviationResult:
    rows: list[DeviationRow]
    fit_c_dy: float
    fit_slope_dy: float
    fit_c_dtheta: float
    fit_slope_dtheta: float
    records: list[TrialRecord]


def _loglog_fit(ps: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    if len(ps) < 2:
        return float(ys[0]) if len(ys) else float("nan"), float("nan")
    slope, intercept = np.polyfit(np.log(ps), np.log(ys), 1)
    return float(np.exp(intercept)), float(slope)


def deviation_sweep(config: SweepConfig, workers: int = 1, progress=None) -> DeviationResult:
    """Mean/std of the per-run maxima of ‖Y−Y(0)‖_op and ‖θ−θ(0)‖_∞ per p,
    plus log-log power-law fits of the means.

    Deviation runs default to the full step budget (no convergence stop) so
    the maxima cover the same horizon at every p.
    """
    cfg = replace(config, track_y=True, convergence_stop=False)
    rows, records = [], []
    for p in cfg.p_grid:
        recs = _run_trials(cfg, p, workers)
        records.extend(recs)
        dys = np.array([r.max_dy for r in recs])
        dths = np.array([r.max_dtheta_inf for r in recs])
        rows.append(
            DeviationRow(
                p=p,
                mean_max_dy=float(dys.mean()),
                std_max_dy=float(dys.std()),
                mean_max_dtheta_inf=float(dths.mean()),
                std_max_dtheta_inf=float(dths.std()),
            )
        )
        if progress:
            progress(f"p={p}: max|Y-Y0|={rows[-1].mean_max_dy:.3f}  max|th-th0|={rows[-1].mean_max_dtheta_inf:.5f}")
    ps = np.array([r.p for r in rows], dtype=float)
    c_dy, s_dy = _loglog_fit(ps, np.array([r.mean_max_dy for r in rows]))
    c_dt, s_dt = _loglog_fit(ps, np.array([r.mean_max_dtheta_inf for r in rows]))
    return DeviationResult(rows, c_dy, s_dy, c_dt, s_dt, records)


@dataclass
class ComparisonEntry:
    model: ModelSpec
    ansatz: AnsatzSpec
    d_eff: int
    kappa_eff: float
    compatible: bool
    threshold_p: int | None
    result: ThresholdResult


def ansatz_comparison(
    model: ModelSpec,
    variants: list[AnsatzSpec],
    config: SweepConfig,
    workers: int = 1,
    progress=None,
) -> list[ComparisonEntry]:
    """Thresholds per ansatz variant with effective quantities attached.

    Incompatible variants are flagged but still run.
    """
    out = []
    for variant in variants:
        cfg = replace(config, model=model, ansatz=variant)
        n = model.n_qubits
        gens = variant.generator_set(n)
        phi = ham.input_state(cfg.input_kind(), n)
        prof = estimate_profile(
            gens, phi, model.build(), rng=trial_rng(cfg.base_seed, 0, 0), l_sample=variant.l_sample
        )
        if progress:
            progress(f"{variant.set_name}: d_eff={prof.d_eff} kappa_eff={prof.kappa_eff:.3g} "
                     f"compatible={prof.compatible}")
        res = threshold_sweep(cfg, workers, progress)
        out.append(
            ComparisonEntry(
                model=model,
                ansatz=variant,
                d_eff=prof.d_eff,
                kappa_eff=prof.kappa_eff,
                compatible=prof.compatible,
                threshold_p=res.threshold_p,
                result=res,
            )
        )
    return out


def write_trials_csv(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("p,trial,seed_key,success,best_error,final_loss,steps_run,status,max_dy,max_dtheta_inf\n")
        for r in records:
            fh.write(
                f"{r.p},{r.trial},{r.seed_key},{int(r.success)},{r.best_error!r},"
                f"{r.final_loss!r},{r.steps_run},{r.status},{r.max_dy!r},{r.max_dtheta_inf!r}\n"
            )


def write_rates_csv(path, result: ThresholdResult) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("p,successes,trials,rate\n")
        for p, s, t in zip(result.p_grid, result.successes, result.trials):
            fh.write(f"{p},{s},{t},{s / t!r}\n")


def write_deviation_csv(path, result: DeviationResult) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("p,mean_max_dy,std_max_dy,mean_max_dtheta_inf,std_max_dtheta_inf\n")
        for r in result.rows:
            fh.write(
                f"{r.p},{r.mean_max_dy!r},{r.std_max_dy!r},"
                f"{r.mean_max_dtheta_inf!r},{r.std_max_dtheta_inf!r}\n"
            )


def write_manifest(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
