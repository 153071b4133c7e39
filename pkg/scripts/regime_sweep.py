"""Exact rho[S_n, Sigma_n] against its leading-order prediction across regimes.

Prints, for a few (a, b) per regime, the ratio exact / predicted at
n = 1e2 .. 1e7.  Convergence is a power of n off criticality and
logarithmic at a = b/2.
"""
import argparse

from erws import from_ab
from erws.asymptotics import predicted_rho
from erws.model import classify
from erws.moments import recursion_tables, rho_from_table

POINTS = [(0.2, 0.8), (-0.4, 0.6), (0.1, 0.3), (0.15, 0.3), (0.3, 0.6), (0.45, 0.9),
          (0.4, 0.5), (0.75, 0.9), (0.5, 0.6)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--max-exp", type=int, default=7)
    args = ap.parse_args()
    ns = [10**k for k in range(2, args.max_exp + 1)]
    print("a,b,regime," + ",".join(f"ratio_n1e{k}" for k in range(2, args.max_exp + 1)))
    for a, b in POINTS:
        p = from_ab(a, b, args.s)
        ratios = [rho_from_table(p, t)[0] / predicted_rho(p, t.n)
                  for t in recursion_tables(p, ns)]
        print(f"{a},{b},{classify(p).label}," + ",".join(f"{r:.6f}" for r in ratios))


if __name__ == "__main__":
    main()
