#!/usr/bin/env python3
"""Run the full verification suite (checkers + all experiments) with defaults.

Any w2lab CLI flag can be appended, e.g.:
    python scripts/run_all.py --seed 7 --workers 8 --out out/full
"""
import sys

from w2lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["all"] + sys.argv[1:]))
