#!/usr/bin/env python3
"""Moments of the half-line momentum density for 2 lam^1.5 x exp(-lam x).

The density has p^-4 tails, so the second moment needs the fitted tail and
the third does not exist; the operator <p^3> instead picks up the boundary
term Im <p^3> = 2 hbar^3 lam^3.
"""
import argparse
import sys

from toa import halfline
from toa.errors import TailError
from toa.numerics import Grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lams", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--pmax", type=float, default=40.0)
    args = ap.parse_args(argv)

    print("lam,norm,m2_density,m2_operator,im_p3_operator,im_p3_expected,m3_density")
    for lam in args.lams:
        s = halfline.linear_exponential_state(lam)
        pmax = args.pmax * lam
        dist = halfline.momentum_density(s, Grid.symmetric(pmax, 1601))
        norm = halfline.moment(dist, 0, tail="powerlaw")
        m2 = halfline.moment(dist, 2, tail="powerlaw")
        try:
            m3 = f"{halfline.moment(dist, 3, tail='powerlaw'):.8g}"
        except TailError:
            m3 = "diverges"
        op2 = halfline.operator_moment(s, 2).real
        op3 = halfline.operator_moment(s, 3).imag
        print(f"{lam:g},{norm:.10f},{m2:.10g},{op2:.10g},{op3:.10g},{2 * lam ** 3:.10g},{m3}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
