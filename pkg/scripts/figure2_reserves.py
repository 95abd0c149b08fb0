"""Further life expectancy by attained age, net against the two distorted
views, for a CTE distortion on the bundled life table.

    python3 scripts/figure2_reserves.py [--alpha 0.9] [--age 50] [--out figure2.csv]
"""

import argparse
import sys

from distorted_premiums import LifeTable, bundled_table, make_cte_distortion, reserve_curves


def main(argv=None):
    ap = argparse.ArgumentParser(description="Figure 2 data")
    ap.add_argument("--alpha", type=float, default=0.9, help="CTE level of the distortion")
    ap.add_argument("--age", type=int, default=50)
    ap.add_argument("--table", help="life table CSV (age,qx); default is the bundled one")
    ap.add_argument("--rate", type=float, default=0.0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    table = LifeTable.from_csv(args.table) if args.table else bundled_table()
    curve = reserve_curves(make_cte_distortion(args.alpha), table, args.age,
                           table.omega - args.age, args.rate)
    text = curve.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"at {args.age}: net {curve.net[0]:.3f}, distorted probabilities "
          f"{curve.distorted_probs[0]:.3f}, distorted outcomes {curve.distorted_outcomes[0]:.3f}",
          file=sys.stderr)


if __name__ == "__main__":
    main()
