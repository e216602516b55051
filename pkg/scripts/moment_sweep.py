"""Extension moment identity over N and k, printed as a table."""
import argparse
import time

from kaclab.density1d import bump, moment
from kaclab.extension import extension_marginal1
from kaclab.numerics import gamma_ratio_factor
from kaclab.sphere import SphereDensity


def run(Ns, ks):
    b = bump()
    print(f"{'N':>5} {'k':>3} {'M_k(Pi1)':>14} {'M_k(ext)':>14} {'factor':>10} {'rel slack':>10}")
    for N in Ns:
        F = SphereDensity.conditioned_tensorization(b, N)
        e = extension_marginal1(F).density
        for k in ks:
            mk, me = moment(F.marginal1, k), moment(e, k)
            c = gamma_ratio_factor(N, k)
            print(f"{N:5d} {k:3g} {mk:14.10f} {me:14.10f} {c:10.6f} {abs(me - c * mk) / mk:10.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", default="8,16,32,64,128,256,512")
    ap.add_argument("--k", default="2,4,6")
    a = ap.parse_args()
    t = time.perf_counter()
    run([int(x) for x in a.N.split(",")], [float(x) for x in a.k.split(",")])
    print(f"# {time.perf_counter() - t:.1f}s")
