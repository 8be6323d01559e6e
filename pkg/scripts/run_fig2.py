#!/usr/bin/env python3
"""Mean-field regret sweep over the number of agents.

Desk-scale by default (T=2000, 100 trajectories, n in {1, 10, 100});
--full switches to the long setting (T=5000, 500 trajectories). Writes
regret.csv + manifest.json for the plotting frontend.
"""

import argparse
import sys

from netlqg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig2")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--full", action="store_true",
                        help="T=5000 with 500 trajectories instead of desk scale")
    args = parser.parse_args()

    T, trajectories = (5000, 500) if args.full else (2000, 100)
    return cli_main([
        "experiment", "--preset", "fig2",
        "--set", f"experiment.T={T}",
        "--set", f"experiment.num_trajectories={trajectories}",
        "--out", args.out, "--seed", str(args.seed), "--jobs", str(args.jobs),
    ])


if __name__ == "__main__":
    sys.exit(main())
