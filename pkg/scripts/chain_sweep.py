"""Bump-family chain sweep: writes chain.csv / epsilon.csv / epsilon.svg.

    python scripts/chain_sweep.py --out results/chain --N 16,32,64,128,256
"""
import argparse
import sys

from kaclab.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/chain")
    ap.add_argument("--N", default="16,32,64,128,256")
    ap.add_argument("--jobs", default="1")
    a = ap.parse_args()
    sys.exit(main(["verify", "--family", "bump", "--N", a.N, "--out", a.out, "--jobs", a.jobs]))
