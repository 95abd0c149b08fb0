"""Distorted probabilities vs distorted outcomes for sigma(u) = 0.7 + 0.9 u^2
on the standard normal: h_sigma with the cdf and density of each view on a grid.

    python3 scripts/figure1_data.py [--out figure1.csv] [--n 801]
"""

import argparse
import sys

import numpy as np

from distorted_premiums import Normal, build_h_sigma, distance_report, make_poly_distortion
from distorted_premiums.distances import figure_data


def main(argv=None):
    ap = argparse.ArgumentParser(description="Figure 1 data")
    ap.add_argument("--out")
    ap.add_argument("--n", type=int, default=801)
    args = ap.parse_args(argv)

    sigma = make_poly_distortion([0.7, 0.0, 0.9])
    loss = Normal()
    h = build_h_sigma(sigma, loss)
    cols = figure_data(sigma, loss, args.n, h=h)
    keys = list(cols)
    lines = [",".join(keys)]
    lines += [",".join(f"{float(v)!r}" for v in row) for row in zip(*(cols[k] for k in keys))]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    y = cols["y"]
    rep = distance_report(sigma, loss, h=h)
    print(f"h'(0) = {h.derivative(0.0):.6f}; mode of L_sigma {y[np.argmax(cols['density_distorted_probs'])]:.3f}, "
          f"of h(L) {y[np.argmax(cols['density_distorted_outcomes'])]:.3f}; "
          f"KS {rep.ks_standard:.4f}, W1 {rep.w1_standard:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
