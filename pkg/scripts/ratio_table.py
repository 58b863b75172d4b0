"""Table of sup/inf of p/sharp_envelope over a (t, r, s) grid for a set of (zeta, alpha)."""

import argparse
import csv
import sys

from subbessel.verify import make_check, make_grid, sweep_ratio


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--zeta", type=float, nargs="+", default=[-0.4, 0.0, 0.5, 1.0, 3.0])
    parser.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    parser.add_argument("--count", type=int, default=17)
    parser.add_argument("--level", type=int, default=1)
    return parser.parse_args()


def main():
    args = parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["zeta", "alpha", "sup", "inf", "drift", "argmax_t", "argmax_r", "argmax_s"])
    for z in args.zeta:
        for a in args.alpha:
            chk, ranges = make_check("envelope", z, a)
            rep = sweep_ratio(chk, make_grid(ranges, args.count, args.level))
            d = "" if rep.refinement_drift is None else "%.4g" % rep.refinement_drift
            w.writerow([z, a, "%.6g" % rep.sup_ratio, "%.6g" % rep.inf_ratio, d] + ["%.4g" % x for x in rep.argmax_point])


if __name__ == "__main__":
    main()
