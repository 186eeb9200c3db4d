#!/usr/bin/env python3
"""Order-4 section experiments: subspace dimensions, the trisecant
intersection criterion against random controls, and fiber-combination
spans.
"""

import argparse

import numpy as np

import trisect.curves as cv
import trisect.gamma00 as g00
import trisect.geometry as ge
import trisect.secants as se
from trisect.selftest import reference_curve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--genera", type=int, nargs="+", default=[2, 3, 4])
    parser.add_argument("--n-controls", type=int, default=10)
    parser.add_argument("--seed", type=int, default=20260823)
    args = parser.parse_args()

    for g in args.genera:
        curve = reference_curve(g)
        periods = cv.period_matrix(curve)
        dim, _, cert = g00.gamma00_dimension(periods.tau)
        expected = 2 ** g - g * (g + 1) // 2 - 1
        print(f"g={g}: dim Gamma_00 = {dim} (expected {expected}), "
              f"rank gap {cert.gap_ratio:.2e}")
        if g < 3:
            continue

        kappa, _ = cv.riemann_constant(curve, periods)
        sample = cv.sample_B_ell(curve, 3, seed=args.seed)
        tri = se.theta_trisecant_construct(curve, periods, sample, kappa)
        dim_tri, info = g00.trisecant_gamma00_test(periods.tau, tri.a.z,
                                                   tri.b.z, tri.c.z)
        print(f"  trisecant intersection dimension: {dim_tri} "
              f"(span rank {info['span_rank']})")

        rng = np.random.default_rng(args.seed)
        control_dims = []
        for _ in range(args.n_controls):
            pts = [ge.theta_divisor_point(periods.tau, rng)
                   for _ in range(3)]
            dim_c, _ = g00.trisecant_gamma00_test(periods.tau, *pts)
            control_dims.append(dim_c)
        print(f"  control dimensions ({args.n_controls} random triples): "
              f"{sorted(set(control_dims))}")

        inner, outer, total, details = g00.span_VpWp(curve, periods,
                                                     sample, kappa)
        print(f"  fiber spans: inner {inner}, with special points {outer}, "
              f"ambient {total} "
              f"({details['n_smooth']} smooth / "
              f"{details['n_special']} special fiber entries)")


if __name__ == "__main__":
    main()
