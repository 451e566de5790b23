#!/usr/bin/env python3
"""Power-budget study: utility of the power-control stage versus the budget
scale, for several noise floors (interference- to noise-dominant regimes).

Emits one CSV row per (noise, theta) pair for plotting.
"""

import argparse
import pathlib

import numpy as np

from flexlink import experiments, io
from flexlink.association import Policy
from flexlink.scenario import generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--policy", default="deud-p")
    ap.add_argument("--thetas", default="0.01:1.01:0.05",
                    help="start:stop:step for the budget scale grid")
    ap.add_argument("--noise-dbm", default="-70,-80,-100,-121.45")
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("theta_sweep.csv"))
    args = ap.parse_args()

    start, stop, step = (float(x) for x in args.thetas.split(":"))
    thetas = list(np.arange(start, stop + step / 2, step))
    noises = [float(x) for x in args.noise_dbm.split(",")]

    scenario = generate(experiments.STUDY_CONFIG, args.seed)
    rows = experiments.run_theta_sweep(scenario, Policy.parse(args.policy),
                                       thetas, noises)
    io.write_csv(args.out, ("noise_dbm", "theta", "lam", "converged"),
                 [(r["noise_dbm"], r["theta"], r["lam"], int(r["converged"]))
                  for r in rows],
                 meta={"seed": args.seed, "policy": args.policy})
    print(f"wrote {args.out} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
