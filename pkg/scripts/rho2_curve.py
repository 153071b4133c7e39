"""Limit of rho[S_n^2, Sigma_n] against a for three b, with the exact n=1e6 overlay.

    python3 scripts/rho2_curve.py --out results/rho2_curve
"""
import argparse
import csv
import os

from erws.svg import line_plot
from erws.verify import check_rho2_curve, rho2_curve_rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--b", type=float, nargs="+", default=[0.3, 0.6, 0.9])
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--out", default="results/rho2_curve")
    args = ap.parse_args()

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    rows = rho2_curve_rows(tuple(args.b), args.points, args.n)
    with open(args.out + ".csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["b", "a", "limit", "exact", "n"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)

    series, dashed = [], []
    for b in args.b:
        sub = [r for r in rows if r["b"] == b]
        xs = [r["a"] for r in sub]
        series += [(f"limit b={b:g}", xs, [r["limit"] for r in sub]),
                   (f"exact b={b:g}", xs, [r["exact"] for r in sub])]
        dashed += [False, True]
    with open(args.out + ".svg", "w") as fh:
        fh.write(line_plot(series, title="rho[S_n^2, Sigma_n]", xlabel="a", ylabel="rho",
                           dashed=dashed))
    for c in check_rho2_curve(rows):
        print(c.line())


if __name__ == "__main__":
    main()
