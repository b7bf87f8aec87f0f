#!/usr/bin/env python3
"""Run every Monte Carlo experiment at its acceptance calibration and
write JSON/CSV reports.

This is the long-form driver; pass --quick for a fast smoke pass with
reduced trial counts.
"""

import argparse
import os
import time

from nonherm import EXPERIMENTS, default_config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out_experiments")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", default=None,
                    help="comma-separated experiment names")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    names = args.only.split(",") if args.only else EXPERIMENTS
    overall = True
    for name in names:
        cfg = default_config(name)
        overrides = {"threads": args.threads}
        if args.quick:
            overrides["trials"] = max(5, cfg.trials // 10)
        t0 = time.perf_counter()
        report = run_experiment(name, cfg, **overrides)
        dt = time.perf_counter() - t0
        overall &= report.passed
        print(f"{name:<18} {'pass' if report.passed else 'FAIL':<5} "
              f"{dt:7.1f}s")
        for key, stat in sorted(report.statistics.items()):
            slope = f" slope={stat.slope:+.3f}" if stat.slope is not None \
                else ""
            print(f"    {key:<28} median={stat.median:11.4g} "
                  f"p95={stat.p95:11.4g}{slope}")
        base = os.path.join(args.outdir, name)
        report.write_json(base + ".json")
        report.write_csv(base + ".csv")
    print("overall:", "pass" if overall else "FAIL")


if __name__ == "__main__":
    main()
