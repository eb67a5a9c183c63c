#!/usr/bin/env python3
"""Sensitivity sweeps: rerun the same Monte Carlo batch while switching one
sensor grade family or one algorithm axis, one output subdirectory per value.

The subdirectories feed the report generator's comparison figures:

    python scripts/sweep.py --axis gyr --scenario 2 --runs 10 --out out/gyr_sweep
    python report/report.py --in out/gyr_sweep --figs grade-compare --out out/report

Axes: gyr, acc, mag, tas, air (grade presets), attitude, horizontal,
vertical (algorithm variants).
"""

import argparse
import sys
from pathlib import Path

from gdnav.cli import main as run_main

AXIS_VALUES = {
    "gyr": ("better", "baseline", "worse", "worst"),
    "acc": ("better", "baseline", "worse", "worst"),
    "mag": ("better", "baseline", "worse"),
    "tas": ("better", "baseline", "worse"),
    "air": ("baseline", "worse", "worst"),
    "attitude": ("baseline", "zero_fb", "zero_fn"),
    "horizontal": ("baseline", "wind_integration", "double_integration"),
    "vertical": ("baseline", "airspeed_integration", "integration"),
}
AXIS_FLAG = {"gyr": "--gyr", "acc": "--acc", "mag": "--mag", "tas": "--tas",
             "air": "--air", "attitude": "--att", "horizontal": "--hor",
             "vertical": "--vert"}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--axis", required=True, choices=sorted(AXIS_VALUES))
    p.add_argument("--scenario", default="2")
    p.add_argument("--runs", default="10")
    p.add_argument("--seed", default="0")
    p.add_argument("--t-end", default=None)
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)

    worst_rc = 0
    for value in AXIS_VALUES[args.axis]:
        out = Path(args.out) / value
        cli = ["--scenario", args.scenario, "--runs", args.runs,
               "--seed", args.seed, AXIS_FLAG[args.axis], value,
               "--out", str(out)]
        if args.t_end:
            cli += ["--t-end", args.t_end]
        print(f"== {args.axis} = {value} -> {out}")
        worst_rc = max(worst_rc, run_main(cli))
    return worst_rc


if __name__ == "__main__":
    sys.exit(main())
