"""Detection sweep over planted instances and random dense tuples."""

import argparse
import time

import numpy as np
from scipy.linalg import subspace_angles

from jspec.criteria import AnalysisOptions, analyze, verify_invariance
from jspec.generators import plant_instance, random_tuple


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--conditioning", type=float, default=10.0)
    ap.add_argument("--permutation", action="store_true", help="also run the permutation test")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    hits, worst_angle, worst_res = 0, 0.0, 0.0
    for seed in range(args.seeds):
        rng = np.random.default_rng([seed, 6])
        N = args.sizes[seed % len(args.sizes)]
        n = 2 + (seed // len(args.sizes)) % 2
        d = int(rng.integers(1, N))
        inst = plant_instance(N, n, d, seed=seed, conditioning=args.conditioning, selfadjoint=seed % 4 == 3)
        r = analyze(inst.tuple, AnalysisOptions(seed=seed, permutation=args.permutation))
        angles = [np.max(subspace_angles(B, inst.basis)) for B in r.subspaces() if B.shape[1] == d]
        if r.reducible and angles and min(angles) <= 1e-6:
            hits += 1
            B = [B for B in r.subspaces() if B.shape[1] == d][int(np.argmin(angles))]
            worst_angle = max(worst_angle, min(angles))
            worst_res = max(worst_res, max(verify_invariance(inst.tuple, B)[0]))
        else:
            print(f"missed: seed={seed} N={N} n={n} d={d}")
    print(f"planted: {hits}/{args.seeds} detected, worst angle {worst_angle:.1e}, worst residual {worst_res:.1e}")

    irreducible = 0
    for seed in range(args.seeds):
        N = args.sizes[seed % len(args.sizes)]
        n = 2 + (seed // len(args.sizes)) % 2
        r = analyze(random_tuple(N, n, seed=seed, selfadjoint=bool(seed % 2)),
                    AnalysisOptions(seed=seed, permutation=args.permutation))
        irreducible += not r.reducible
    print(f"random: {irreducible}/{args.seeds} irreducible")
    print(f"total {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
