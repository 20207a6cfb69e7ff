#!/usr/bin/env python3
"""Run the checker registry only (identities, inequality suites, solver contracts)."""
import sys

from w2lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["check"] + sys.argv[1:]))
