"""Command-line entry point.

Subcommands: train, deviation, threshold, effective, kappa-scan, verify.
Each takes a JSON config file and writes its outputs (plus a manifest that
reproduces the run) into the --out directory. Progress goes to stderr; data
only to files. Exit codes: 0 success, 1 config error, 2 runtime abort,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import ansatz as anz
from . import dynamics as dyn
from . import experiments as exp
from . import hamiltonians as ham
from . import verify as verify_mod
from .effective import estimate_profile, full_kappa, effective_spectrum, estimate_projector, extract_basis
from .experiments import AnsatzSpec, ModelSpec, SweepConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _require(cfg: dict, key: str, context: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{context} is missing required key {key!r}")
    return cfg[key]


def _model_spec(cfg: dict) -> ModelSpec:
    section = _require(cfg, "model")
    family = _require(section, "family", "model")
    if family not in ham.MODEL_FAMILIES:
        raise ConfigError(f"unknown model family {family!r}; choose from {ham.MODEL_FAMILIES}")
    return ModelSpec(family, dict(section.get("params", {})))


def _ansatz_spec(cfg: dict, required: bool = True) -> AnsatzSpec:
    section = cfg.get("ansatz")
    if section is None:
        if required:
            raise ConfigError("config is missing the 'ansatz' section")
        return AnsatzSpec("tfi2")
    name = _require(section, "set", "ansatz")
    if name != "synthetic" and name not in ham.GENERATOR_SETS:
        raise ConfigError(f"unknown generator set {name!r}; choose from {ham.GENERATOR_SETS}")
    try:
        return AnsatzSpec(
            set_name=name,
            mode=section.get("mode", "partially_trainable"),
            h_index=int(section.get("h_index", 0)),
            l_sample=int(section.get("l_sample", 20)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _noise_spec(section: dict | None) -> dyn.NoiseSpec:
    if not section:
        return dyn.NoiseSpec()
    try:
        return dyn.NoiseSpec(section.get("kind", "gaussian_iid"), float(section.get("variance", 0.0)))
    except ValueError as exc:
        raise ConfigError(str(exc))


def _sweep_config(cfg: dict, seed_override: int | None) -> SweepConfig:
    sweep = _require(cfg, "sweep")
    base_seed = seed_override if seed_override is not None else int(cfg.get("seed", 0))
    try:
        return SweepConfig(
            model=_model_spec(cfg),
            ansatz=_ansatz_spec(cfg),
            p_grid=list(_require(sweep, "p_grid", "sweep")),
            trials_per_p=int(sweep.get("trials_per_p", 100)),
            eta_c=float(sweep.get("eta_c", 1e-2)),
            max_steps=int(sweep.get("max_steps", 10_000)),
            success_threshold=float(sweep.get("success_threshold", 0.01)),
            success_rate_bar=float(sweep.get("success_rate_bar", 0.98)),
            noise=_noise_spec(sweep.get("noise")),
            base_seed=base_seed,
            input_state=cfg.get("input_state"),
            record_stride=int(sweep.get("record_stride", 50)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress(args):
    if args.quiet:
        return lambda msg: None
    return lambda msg: print(msg, file=sys.stderr, flush=True)


def _manifest(args, cfg: dict, extra: dict | None = None) -> dict:
    payload = {
        "command": args.command,
        "config": cfg,
        "seed_override": args.seed,
        "workers": args.workers,
        "version": __version__,
    }
    if extra:
        payload.update(extra)
    return payload


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    model = _model_spec(cfg)
    train = _require(cfg, "train")
    p = int(_require(train, "p", "train"))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    sweep = SweepConfig(
        model=model,
        ansatz=_ansatz_spec(cfg, required=model.family != "synthetic"),
        p_grid=[p],
        trials_per_p=1,
        eta_c=float(train.get("eta_c", 1e-2)),
        max_steps=int(train.get("max_steps", 10_000)),
        success_threshold=float(train.get("success_threshold", 0.01)),
        noise=_noise_spec(train.get("noise")),
        base_seed=seed,
        input_state=cfg.get("input_state"),
        track_y=bool(train.get("track_y", False)),
        record_stride=int(train.get("record_stride", 1)),
        convergence_stop=train.get("convergence_threshold", 0.01) is not None,
    )
    rng = exp.trial_rng(seed, p, 0)
    inst, theta0 = exp.build_instance(sweep, p, rng)
    record = dyn.RecordingPolicy(stride=sweep.record_stride, track_y=sweep.track_y)
    thr = train.get("convergence_threshold", 0.01)
    trace = dyn.gradient_descent(
        inst,
        theta0,
        sweep.eta_c / p,
        sweep.max_steps,
        noise=sweep.noise,
        record=record,
        rng=rng,
        convergence_threshold=thr,
    )
    out = _out_dir(args)
    trace.write_csv(out / "trace.csv")
    exp.write_manifest(
        out / "manifest.json",
        _manifest(args, cfg, {"status": trace.status, "best_error": trace.best_error,
                              "steps_run": trace.steps_run}),
    )
    _progress(args)(f"train: status={trace.status} best_error={trace.best_error:.3e}")
    return EXIT_OK if trace.status != "aborted" else EXIT_RUNTIME


def _attach_trace_sink(cfg: dict, sweep: SweepConfig, out: Path) -> None:
    if not cfg.get("sweep", {}).get("save_traces"):
        return
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    sweep.trace_sink = lambda p, trial, trace: trace.write_csv(
        traces_dir / f"trace_p{p}_t{trial}.csv"
    )


def cmd_threshold(args) -> int:
    cfg = _load_config(args.config)
    sweep = _sweep_config(cfg, args.seed)
    out = _out_dir(args)
    _attach_trace_sink(cfg, sweep, out)
    result = exp.threshold_sweep(sweep, workers=args.workers, progress=_progress(args))
    exp.write_rates_csv(out / "rates.csv", result)
    exp.write_trials_csv(out / "trials.csv", result.records)
    exp.write_manifest(
        out / "manifest.json",
        _manifest(
            args,
            cfg,
            {
                "threshold_p": result.threshold_p,
                "monotonicity_flags": result.monotonicity_flags(),
            },
        ),
    )
    _progress(args)(f"threshold: {result.threshold_p}")
    return EXIT_OK


def cmd_deviation(args) -> int:
    cfg = _load_config(args.config)
    sweep = _sweep_config(cfg, args.seed)
    out = _out_dir(args)
    _attach_trace_sink(cfg, sweep, out)
    result = exp.deviation_sweep(sweep, workers=args.workers, progress=_progress(args))
    exp.write_deviation_csv(out / "deviation.csv", result)
    exp.write_trials_csv(out / "trials.csv", result.records)
    exp.write_manifest(
        out / "manifest.json",
        _manifest(
            args,
            cfg,
            {
                "fit_dy": {"c": result.fit_c_dy, "slope": result.fit_slope_dy},
                "fit_dtheta": {"c": result.fit_c_dtheta, "slope": result.fit_slope_dtheta},
            },
        ),
    )
    return EXIT_OK


def cmd_effective(args) -> int:
    cfg = _load_config(args.config)
    model = _model_spec(cfg)
    spec = _ansatz_spec(cfg)
    est = cfg.get("estimator", {})
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    n = model.n_qubits
    gens = spec.generator_set(n)
    kind = cfg.get("input_state") or ham.default_input_state(model.family)
    phi = ham.input_state(kind, n)
    prof = estimate_profile(
        gens,
        phi,
        model.build(),
        r_samples=int(est.get("r_samples", 100)),
        l_sample=int(est.get("l_sample", spec.l_sample)),
        rng=np.random.default_rng(seed),
        rank_tol=float(est.get("rank_tol", 1e-6)),
        leak_tol=float(est.get("leak_tol", 1e-6)),
        seed=seed,
    )
    out = _out_dir(args)
    (out / "effective.json").write_text(prof.to_json() + "\n")
    if cfg.get("dump_basis"):
        ham.dump_matrix(out / "basis_q.c16", prof.basis_q)
    exp.write_manifest(out / "manifest.json", _manifest(args, cfg, {"d_eff": prof.d_eff}))
    _progress(args)(f"effective: d_eff={prof.d_eff} kappa_eff={prof.kappa_eff:.6g} "
                    f"compatible={prof.compatible}")
    return EXIT_OK


def cmd_kappa_scan(args) -> int:
    cfg = _load_config(args.config)
    model = _model_spec(cfg)
    spec = _ansatz_spec(cfg)
    scan = _require(cfg, "scan")
    param_name = _require(scan, "param", "scan")
    values = [float(v) for v in _require(scan, "values", "scan")]
    est = cfg.get("estimator", {})
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    n = model.n_qubits
    gens = spec.generator_set(n)
    kind = cfg.get("input_state") or ham.default_input_state(model.family)
    phi = ham.input_state(kind, n)
    rng = np.random.default_rng(seed)
    pi_hat = estimate_projector(gens, phi, int(est.get("r_samples", 100)),
                                int(est.get("l_sample", spec.l_sample)), rng)
    basis_q, d_eff = extract_basis(pi_hat, float(est.get("rank_tol", 1e-6)))
    out = _out_dir(args)
    with open(out / "scan.csv", "w", newline="") as fh:
        fh.write("param,kappa,kappa_eff,d_eff,degenerate_flag\n")
        for value in values:
            params = dict(model.params)
            params[param_name] = value
            m = ham.model_matrix(model.family, **params)
            kappa, deg_full = full_kappa(m)
            _, kappa_eff, deg_eff = effective_spectrum(m, basis_q)
            flag = int(deg_full or deg_eff)
            fh.write(f"{value!r},{kappa!r},{kappa_eff!r},{d_eff},{flag}\n")
            _progress(args)(f"{param_name}={value}: kappa={kappa:.6g} kappa_eff={kappa_eff:.6g}")
    exp.write_manifest(out / "manifest.json", _manifest(args, cfg, {"d_eff": d_eff}))
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify_mod.run_all(report=_progress(args))
    out = _out_dir(args)
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}" for r in results]
    (out / "verify.txt").write_text("\n".join(lines) + "\n")
    n_fail = sum(not r.passed for r in results)
    _progress(args)(f"verify: {len(results) - n_fail}/{len(results)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


COMMANDS = {
    "train": cmd_train,
    "deviation": cmd_deviation,
    "threshold": cmd_threshold,
    "effective": cmd_effective,
    "kappa-scan": cmd_kappa_scan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        if name != "verify":
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=1, help="trial-level worker threads")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, RuntimeError, ValueError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
