#!/usr/bin/env python3
"""Run the convergence-rate experiments (d=1 quantile path, d=2 exact transport)."""
import sys

from w2lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["rate"] + sys.argv[1:]))
