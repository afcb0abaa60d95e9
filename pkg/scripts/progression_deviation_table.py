#!/usr/bin/env python3
"""Compare the two progression second-moment predictions against brute force.

For each class n = N (mod v) this prints the relative deviation, scaled by
x log x / v, of the empirical sum of (Lambda(n) - F_R(n))^2 from

  * the closed-form prediction, which replaces the per-class mean of F_R(n)^2
    by (log R + c2)/v plus the coprime spike, and
  * the refined prediction, which computes that mean exactly from the
    expansion pairs (r, r1) including the ones coupled through v.

The closed form drifts at main order once v > 1 because pairs (g*s, g*s1)
with s, s1 | v survive averaging over the class; the refined column shows
the remaining error is noise scale.
"""

from __future__ import annotations

import argparse
import math

from vaughanlab import (
    FRConfig,
    build_sieve,
    build_tables,
    constant_set,
    delta_sq_progression,
    theorem3_prediction,
    theorem3_refined_prediction,
)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--x", type=int, default=10**6)
    parser.add_argument("--R", type=float, default=50.0)
    parser.add_argument(
        "--v", default="1,2,3,5,6,7,10", help="comma-separated progression moduli"
    )
    return parser.parse_args()


def second_coprime(v: int) -> int:
    for k in range(2, v):
        if math.gcd(k, v) == 1:
            return k
    return v + 1


def main() -> None:
    args = parse_args()
    moduli = [int(s) for s in args.v.split(",") if s.strip()]
    cfg = FRConfig(R=args.R, tables=build_tables(build_sieve(args.x)))
    cs = constant_set()
    print(f"x = {args.x}, R = {args.R}")
    print(f"{'v':>3} {'N':>3} {'empirical':>16} {'closed-form dev':>16} {'exact-mean dev':>16}")
    for v in moduli:
        cases = [1] if v == 1 else sorted({1, second_coprime(v), v})
        for n_shift in cases:
            emp = delta_sq_progression(args.x, v, n_shift, cfg)
            closed = theorem3_prediction(args.x, v, n_shift, args.R, cs)
            refined = theorem3_refined_prediction(args.x, v, n_shift, cfg, cs)
            scale = args.x * math.log(args.x) / v
            print(
                f"{v:>3} {n_shift:>3} {emp:>16.1f} "
                f"{abs(emp - closed.total) / scale:>16.4f} "
                f"{abs(emp - refined.total) / scale:>16.4f}"
            )


if __name__ == "__main__":
    main()
