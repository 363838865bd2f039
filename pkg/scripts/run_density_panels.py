#!/usr/bin/env python3
"""Run the four density panels: the fixed-fraction and shrinking-neighborhood
scans on the alternating rectangle family, the quadratic-neighborhood scan on
the flat family, and the linear-neighborhood scan on a vertical segment."""

import argparse

import numpy as np

from heislab.constructions import Example1, build_family, family_cloud, level_sides, segment_cloud
from heislab.hgeom import Point
from heislab.probes import ex1_scan, ex2_probe, panel_from_rects, thm1_scan, thm2_scan


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--level", type=int, default=4, help="alternating-family level")
    ap.add_argument("--M", type=float, default=2.0)
    args = ap.parse_args()

    family = build_family(Example1(), args.level)
    cloud = family_cloud(family, 4, kind="ex1")
    h_by = {k: level_sides(Example1(), k)[0] for k in range(args.level + 1)}

    bases = panel_from_rects(family, 12, x_max=0.75)
    res = ex1_scan(cloud, h_by, range(1, args.level), bases)
    print(f"ex1 fixed-fraction rho=r/8: min ratio {res.summary['min_ratio']:.4f} "
          f"(target >= 1/8), max {res.summary['max_ratio']:.4f}, "
          f"error bound {res.error_bound:.2e}")

    h2, hL = h_by[2], h_by[args.level]
    wide = panel_from_rects(family, 20)
    res = thm1_scan(cloud, wide, 0.5, np.geomspace(h2, hL, 30))
    mins = [min(e.ratio for e in ps.series) for ps in res.points]
    frac = sum(1 for m in mins if m <= 0.05) / len(mins)
    print(f"ex1 shrinking rho=r^1.5:   min ratio <= 0.05 at {frac:.0%} of points "
          f"(liminf contrast)")

    res = ex2_probe(args.M, 10, base_count=12)
    print(f"ex2 quadratic rho=Mr^2:    min ratio {res.summary['min_ratio']:.4f} "
          f"(target >= 1/16) over windows k={res.extra['window_levels']}")

    tseg = segment_cloud("t", -1.0, 1.0, 16384)
    res = thm2_scan(tseg, [Point(0, 0, 0)], 0.25, np.geomspace(0.2, 0.02, 9), s=1.0)
    print(f"tseg linear rho=r/4:       max ratio {res.summary['max_ratio']:.4f} "
          f"(oracle 3/4, bound > 1/4)")


if __name__ == "__main__":
    main()
