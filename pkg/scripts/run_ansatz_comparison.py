#!/usr/bin/env python3
"""Compare ansatz designs on one model: estimate (d_eff, kappa_eff) per
design, then measure the over-parameterization threshold of each by training.

Examples:
    python scripts/run_ansatz_comparison.py --model tfi --n 4 --g 0.3
    python scripts/run_ansatz_comparison.py --model xxz --n 4 --j-zz -0.9 --trials 100
"""

import argparse

from vqesim import experiments as exp


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--model", choices=["tfi", "xxz"], default="tfi")
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--g", type=float, default=0.3)
    parser.add_argument("--j-zz", type=float, default=-0.5)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=6000)
    parser.add_argument("--p-max", type=int, default=48)
    args = parser.parse_args()

    if args.model == "tfi":
        model = exp.ModelSpec("tfi1d", {"n": args.n, "g": args.g})
        variants = [exp.AnsatzSpec("tfi2"), exp.AnsatzSpec("tfi3")]
        input_state = "zero"
    else:
        model = exp.ModelSpec("xxz1d", {"n": args.n, "j_zz": args.j_zz})
        variants = [exp.AnsatzSpec("xxz4"), exp.AnsatzSpec("xxz6")]
        input_state = "singlet"
    grid = sorted({2, 4, 6, 8, 10, 12, 16, 20, 26, 32, 40, args.p_max})
    grid = [p for p in grid if p <= args.p_max]
    cfg = exp.SweepConfig(
        model=model,
        ansatz=variants[0],
        p_grid=grid,
        trials_per_p=args.trials,
        eta_c=1e-2,
        max_steps=10_000,
        base_seed=args.seed,
        input_state=input_state,
    )
    entries = exp.ansatz_comparison(model, variants, cfg, workers=args.workers, progress=print)
    print()
    for e in entries:
        print(
            f"{e.ansatz.set_name}: d_eff={e.d_eff} kappa_eff={e.kappa_eff:.3g} "
            f"compatible={e.compatible} threshold={e.threshold_p}"
        )


if __name__ == "__main__":
    main()
