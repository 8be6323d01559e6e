#!/usr/bin/env python3
"""Low-rank network regret sweep over coupling strength and agent count.

Runs both edge-weight settings (a=b=0.05 and a=b=5) across network sizes
4n in {4, 40, 80, 100}. Desk-scale horizons by default; --full matches the
long setting (T=5000, 500 trajectories).
"""

import argparse
import sys

from netlqg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig3")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--sizes", default="[4,40,80,100]",
                        help="JSON list of total agent counts (multiples of 4)")
    parser.add_argument("--full", action="store_true")
    args = parser.parse_args()

    T, trajectories = (5000, 500) if args.full else (2000, 100)
    return cli_main([
        "experiment", "--preset", "fig3",
        "--set", f"experiment.T={T}",
        "--set", f"experiment.num_trajectories={trajectories}",
        "--set", f"experiment.sizes={args.sizes}",
        "--out", args.out, "--seed", str(args.seed), "--jobs", str(args.jobs),
    ])


if __name__ == "__main__":
    sys.exit(main())
