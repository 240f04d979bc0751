"""Recompute the T=100 comparison cells and show the deviation from the reference values.

    python scripts/table1.py --runs 1000 --seed 42 --procedure reference
"""

import argparse

from floodmix.cli import table1_rows
from floodmix.simulation import DEFAULT_RUNS, PROCEDURES


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--procedure", choices=PROCEDURES + ("both",), default="both")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)

    procs = PROCEDURES if args.procedure == "both" else (args.procedure,)
    rows = table1_rows(args.seed, args.runs, procs, args.workers)
    # one line per (procedure, cell, model), bias and rmse side by side
    merged = {}
    for r in rows:
        key = (r["procedure"], r["scenario_id"], r["n_extreme"], r["years"], r["model"])
        merged.setdefault(key, {})[r["metric"]] = (r["reference"], r["computed"])
    print(f"{'procedure':9} {'sc':>2} {'nE':>2} {'n':>4} {'model':5} "
          f"{'bias ref':>8} {'bias':>7} {'rmse ref':>8} {'rmse':>7}")
    for (proc, sid, ne, n, model), m in merged.items():
        (bp, bc), (rp, rc) = m["bias"], m["rmse"]
        print(f"{proc:9} {sid:>2} {ne:>2} {n:>4} {model:5} {bp:8.3f} {bc:7.3f} {rp:8.3f} {rc:7.3f}")


if __name__ == "__main__":
    main()
