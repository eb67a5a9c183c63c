#!/usr/bin/env python3
"""Run one Monte Carlo batch; thin wrapper over the package CLI.

Example:
    python scripts/run_mc.py --scenario 2 --runs 10 --seed 1 --out out/desk2
"""

import sys

from gdnav.cli import main

if __name__ == "__main__":
    sys.exit(main())
