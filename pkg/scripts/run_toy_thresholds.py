#!/usr/bin/env python3
"""Threshold sweeps over the synthetic embedded instances: vary the system
dimension, the effective dimension, and the effective spectral ratio, and
print the success-rate tables plus the extracted thresholds.

Usage: python scripts/run_toy_thresholds.py [--trials 100] [--workers 2] [--out DIR]
"""

import argparse
from pathlib import Path

from vqesim import experiments as exp

SWEEPS = [
    ("dim", [("d", d, {"d": d, "d_eff": 4, "kappa_eff": 2.0},
              [2, 4, 6, 8, 10, 12, 16, 20]) for d in (8, 16, 32)]),
    ("d_eff", [("d_eff", de, {"d": 16, "d_eff": de, "kappa_eff": 2.0}, grid)
               for de, grid in ((2, [1, 2, 3, 4, 6, 8]),
                                (4, [2, 4, 6, 8, 10, 12, 16, 20]),
                                (6, [2, 4, 6, 8, 12, 16, 20, 24]),
                                (8, [4, 8, 12, 16, 20, 24, 32, 40]))]),
    ("kappa_eff", [("kappa_eff", k, {"d": 16, "d_eff": 4, "kappa_eff": k}, grid)
                   for k, grid in ((2.0, [2, 4, 6, 8, 10, 12, 16, 20]),
                                   (4.0, [4, 6, 8, 10, 12, 16, 20, 24]),
                                   (8.0, [4, 8, 12, 16, 20, 24, 32]),
                                   (16.0, [8, 12, 16, 20, 24, 32, 40, 48]))]),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=5000)
    parser.add_argument("--out", default=None, help="optional directory for per-sweep CSVs")
    args = parser.parse_args()

    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for sweep_name, points in SWEEPS:
        print(f"== varying {sweep_name}")
        for label, value, params, grid in points:
            cfg = exp.SweepConfig(
                model=exp.ModelSpec("synthetic", params),
                ansatz=exp.AnsatzSpec("tfi2"),
                p_grid=grid,
                trials_per_p=args.trials,
                eta_c=1e-2,
                max_steps=10_000,
                base_seed=args.seed + int(value),
            )
            res = exp.threshold_sweep(cfg, workers=args.workers)
            rates = " ".join(f"{p}:{s}/{t}" for p, s, t in zip(res.p_grid, res.successes, res.trials))
            print(f"{label}={value}: threshold={res.threshold_p}  {rates}", flush=True)
            if out:
                exp.write_rates_csv(out / f"{sweep_name}_{label}_{value}.csv", res)


if __name__ == "__main__":
    main()
