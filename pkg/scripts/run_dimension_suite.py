#!/usr/bin/env python3
"""Estimate Euclidean and gauge covering dimensions for the whole construction
catalog and check each pair against the comparison band."""

import argparse
import time

import numpy as np

from heislab.constructions import (
    cantor_cloud,
    expected_dims,
    hsquare_cloud,
    product_cloud,
    segment_cloud,
)
from heislab.dimension import check_dimension_inequalities, estimate_dimension, net_counts
from heislab.hgeom import MetricKind

E = MetricKind.EUCLIDEAN
H = MetricKind.HEISENBERG


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--fs-qh-depth", type=int, default=8)
    ap.add_argument("--fs-cantor-depth", type=int, default=6)
    args = ap.parse_args()

    jobs = []
    dyadic = [2.0**-j for j in range(2, 9)]
    xseg = segment_cloud("x", 0.0, 1.0, 4096)
    tseg = segment_cloud("t", -1.0, 1.0, 16384)
    jobs.append(("xseg", xseg, dyadic, dyadic))
    jobs.append(("tseg", tseg, dyadic, np.geomspace(0.5, 0.0625, 8)))
    jobs.append(("cantor d=1/2", cantor_cloud(0.5, 7),
                 [4.0**-j for j in range(1, 6)], [2.0**-j for j in range(1, 6)]))
    jobs.append(("hsquare", hsquare_cloud(7), None, np.geomspace(0.64, 0.08, 8)))
    fs = product_cloud(hsquare_cloud(args.fs_qh_depth), cantor_cloud(0.5, args.fs_cantor_depth))
    jobs.append(("fs d=1/2", fs, np.geomspace(0.3, 0.02, 8), np.geomspace(0.8, 0.1, 8)))

    print(f"{'set':14} {'n':>9} {'dim_E':>8} {'dim_H':>8} {'targets':>14} {'band':>6} {'time':>7}")
    for name, cloud, deltas_e, deltas_h in jobs:
        t0 = time.time()
        slope_e = None
        if deltas_e is not None:
            slope_e = estimate_dimension(net_counts(cloud, deltas_e, E), metric=E).slope
        slope_h = estimate_dimension(net_counts(cloud, deltas_h, H), metric=H).slope
        te, th = expected_dims(cloud.source)
        band = ""
        if slope_e is not None:
            band = str(check_dimension_inequalities(slope_e, slope_h, tol=0.1).ok)
        se = f"{slope_e:.3f}" if slope_e is not None else "-"
        tgt = f"({te if te is not None else '-'}, {th})"
        print(f"{name:14} {len(cloud):>9} {se:>8} {slope_h:>8.3f} {tgt:>14} {band:>6} "
              f"{time.time() - t0:>6.1f}s")


if __name__ == "__main__":
    main()
