#!/usr/bin/env python3
"""Mean and peak of the arrival-time density against the classical -m x0 / p0.

Sweeps the momentum width at fixed p0 and x0 and writes one CSV row per width.
"""
import argparse
import sys

from toa import arrival
from toa.states import GaussianSpec, PhysicalConstants, build_state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p0", type=float, default=5.0)
    ap.add_argument("--x0", type=float, default=-10.0)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.5])
    ap.add_argument("--mass", type=float, default=1.0)
    args = ap.parse_args(argv)

    c = PhysicalConstants(mass=args.mass)
    t_cl = -args.mass * args.x0 / args.p0
    print("sigma_p,t_classical,mean,peak,t_flux,norm")
    for sigma in args.sigmas:
        s = build_state([GaussianSpec(args.p0, sigma, args.x0)], c)
        dist = arrival.kijowski_distribution(s)
        t_flux, _ = arrival.arrival_mean_flux(s, dist.grid)
        print(f"{sigma:.6g},{t_cl:.6g},{dist.mean():.8g},{dist.peak():.8g},"
              f"{t_flux:.8g},{dist.total:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
