#!/usr/bin/env python3
"""Reproduce the effective-dimension tables for the TFI and XXZ ansatz
families (R=100, L_sample=20) and print them as rows per qubit count.

Usage: python scripts/run_effective_tables.py [--n 4 6 8] [--seed 1000]
N=10 adds roughly a minute per family (d=1024).
"""

import argparse
import time

import numpy as np

from vqesim import effective as eff
from vqesim import hamiltonians as ham

FAMILIES = [
    ("tfi2", "zero"),
    ("tfi3", "zero"),
    ("xxz4", "singlet"),
    ("xxz6", "singlet"),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, nargs="+", default=[4, 6, 8])
    parser.add_argument("--seed", type=int, default=1000)
    parser.add_argument("--r-samples", type=int, default=100)
    args = parser.parse_args()

    print("set      " + "".join(f"N={n:<6}" for n in args.n))
    for set_name, input_kind in FAMILIES:
        row = []
        for n in args.n:
            t0 = time.time()
            gens = ham.generator_set(set_name, n)
            phi = ham.input_state(input_kind, n)
            pi = eff.estimate_projector(
                gens, phi, args.r_samples, 20, np.random.default_rng(args.seed + n)
            )
            _, d_eff = eff.extract_basis(pi)
            row.append(f"{d_eff:<8}")
            print(f"  [{set_name} N={n}: {time.time() - t0:.1f}s]", flush=True)
        print(f"{set_name:<9}" + "".join(row))


if __name__ == "__main__":
    main()
