#!/usr/bin/env python3
"""Demonstrate flow propagation: couple the Ornstein--Uhlenbeck matrix
flow to the characteristic flow of two spectral parameters and print
the normalized Im-law error along the path."""

import argparse

from nonherm import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--T", type=float, default=0.3)
    args = ap.parse_args()

    rep = run_experiment("zig-propagation", n=args.n, trials=args.trials,
                         flow_time=args.T)
    for key, stat in sorted(rep.statistics.items()):
        print(f"{key:<22} median={stat.median:10.4g} p95={stat.p95:10.4g} "
              f"{'pass' if stat.passed else 'FAIL'}")
    print("passed:", rep.passed)


if __name__ == "__main__":
    main()
