"""lambda_N(u) for the bump and Gaussian bases; CSV + SVG per family."""
import argparse
import sys

from kaclab.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/zcurve")
    ap.add_argument("--N", default="16,64,256")
    a = ap.parse_args()
    rc = 0
    for fam in ("bump", "gaussian"):
        rc |= main(["zcurve", "--family", fam, "--N", a.N, "--out", f"{a.out}/{fam}"])
    sys.exit(rc)
