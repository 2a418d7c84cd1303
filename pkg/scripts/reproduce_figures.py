"""Run every builtin scenario of figures 1, 3 and 4 and write report.json files.

    python3 scripts/reproduce_figures.py --out runs/ [--svg]
"""

import argparse
import sys

from excitable.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--svg", action="store_true")
    args = ap.parse_args()
    codes = []
    for fig in ("1", "3", "4"):
        argv = ["reproduce", "--figure", fig, "--out", f"{args.out}/figure{fig}"] + (["--svg"] if args.svg else [])
        codes.append(main(argv))
    sys.exit(max(codes))
