#!/usr/bin/env python3
"""Run the halfspace-distance experiments and the shifted-Gaussian calibration."""
import sys

from w2lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["ci"] + sys.argv[1:]))
