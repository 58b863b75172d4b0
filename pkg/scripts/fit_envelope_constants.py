"""Fit envelope prefactors on a grid and print them with their refinement drift."""

import argparse

from subbessel.bessel_kernel import FORMS, fit_gaussian_envelope
from subbessel.stable import fit_subordinator_envelope
from subbessel.verify import TRG, make_grid


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--zeta", type=float, nargs="+", default=[-0.4, 0.0, 0.5, 1.0, 3.0])
    parser.add_argument("--beta", type=float, nargs="+", default=[0.25, 0.5, 0.75, 0.9])
    parser.add_argument("--count", type=int, default=13, help="level-0 points per axis of the (t, r, s) grid")
    return parser.parse_args()


def main():
    args = parse_args()
    grid = make_grid(TRG, args.count, 1)
    pts = grid.points()
    coarse = grid.coarse_index()
    t, r, s = pts["t"], pts["r"], pts["s"]
    print("zeta,form,c_lo,c_hi,A_lo,A_hi,drift")
    for z in args.zeta:
        for form in FORMS:
            fine = fit_gaussian_envelope(z, t, r, s, form)
            f0 = fit_gaussian_envelope(z, t[coarse], r[coarse], s[coarse], form)
            drift = max(abs(fine.A_lo / f0.A_lo - 1), abs(fine.A_hi / f0.A_hi - 1))
            print(f"{z:g},{form},{fine.c_lo:g},{fine.c_hi:g},{fine.A_lo:.6g},{fine.A_hi:.6g},{drift:.3g}")
    print()
    print("beta,C_lo,C_hi,A_lo,A_hi")
    for b in args.beta:
        e = fit_subordinator_envelope(b)
        print(f"{b:g},{e.C_lo:.6g},{e.C_hi:.6g},{e.A_lo:.6g},{e.A_hi:.6g}")


if __name__ == "__main__":
    main()
