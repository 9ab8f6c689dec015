"""Sweep the L1 sparsity weight and report basis sparsity vs clustering quality.

For each weight the conjugate-gradient solver is started from the same seeded
initial points; the script prints the mean fraction of near-zero basis entries
and the mean clustering accuracy across seeds.

    python scripts/sparsity_sweep.py --weights 0,1e-3,1e-2 --seeds 10
"""
import argparse

import numpy as np

import rlda


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--weights", type=str, default="0,1e-3,1e-2",
                        help="comma-separated L1 weights")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--classes", type=int, default=5)
    parser.add_argument("--per-class", type=int, default=100)
    parser.add_argument("--spread", type=float, default=4.0)
    parser.add_argument("--subspace-dim", type=int, default=4)
    parser.add_argument("--zero-tol", type=float, default=1e-3,
                        help="entries below this magnitude count as zero")
    args = parser.parse_args()
    weights = [float(w) for w in args.weights.split(",")]

    fractions = {w: [] for w in weights}
    accs = {w: [] for w in weights}
    for seed in range(args.seeds):
        ds = rlda.synth_gaussian_classes(
            args.dim, args.classes, args.per_class, args.spread, 1.0, seed
        )
        pair = rlda.scatter_matrices(ds)
        init = rlda.random_point(args.dim, args.subspace_dim, seed + 900, rlda.stiefel())
        for w in weights:
            problem = rlda.DiscriminantProblem(pair, rlda.stiefel(), w)
            res = rlda.solve_cg(problem, init)
            feats = rlda.project_features(res.point, ds.data)
            assign = rlda.kmeans(feats, args.classes, n_init=10, seed=seed + 70)
            fractions[w].append(float(np.mean(np.abs(res.point.matrix) < args.zero_tol)))
            accs[w].append(rlda.clustering_accuracy(assign, ds.labels))

    print(f"{'l1 weight':>10}  {'near-zero frac':>14}  {'mean acc':>8}")
    for w in weights:
        print(f"{w:>10g}  {np.mean(fractions[w]):>14.6f}  {np.mean(accs[w]):>8.4f}")


if __name__ == "__main__":
    main()
