#!/usr/bin/env python3
"""Run the lattice lower-bound experiments."""
import sys

from w2lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["lower"] + sys.argv[1:]))
