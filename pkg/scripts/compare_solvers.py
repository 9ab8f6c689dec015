"""Compare the trust-region and conjugate-gradient solvers on synthetic suites.

Runs both solvers from identical initial points over a batch of seeded
Gaussian class datasets, then prints per-solver final cost, iteration count,
and downstream clustering accuracy next to the eigenvalue lower bound.

    python scripts/compare_solvers.py --seeds 10 --dim 64 --classes 5
"""
import argparse

import numpy as np

import rlda


def run_suite(args):
    rows = []
    for seed in range(args.seeds):
        ds = rlda.synth_gaussian_classes(
            args.dim, args.classes, args.per_class, args.spread, 1.0, seed
        )
        pair = rlda.scatter_matrices(ds)
        problem = rlda.DiscriminantProblem(pair, rlda.stiefel(), args.l1_weight)
        init = rlda.random_point(args.dim, args.subspace_dim, seed + 900, problem.manifold)

        gap = pair.s_w - pair.s_b
        bound = float(np.sum(np.sort(np.linalg.eigvalsh(gap))[: args.subspace_dim]))
        row = {"seed": seed, "bound": bound}
        for name, solve in (("tr", rlda.solve_tr), ("cg", rlda.solve_cg)):
            res = solve(problem, init)
            feats = rlda.project_features(res.point, ds.data)
            assign = rlda.kmeans(feats, args.classes, n_init=10, seed=seed + 70)
            row[name] = {
                "cost": res.final_cost,
                "iters": res.iterations,
                "acc": rlda.clustering_accuracy(assign, ds.labels),
            }
        rows.append(row)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--classes", type=int, default=5)
    parser.add_argument("--per-class", type=int, default=100)
    parser.add_argument("--spread", type=float, default=4.0)
    parser.add_argument("--subspace-dim", type=int, default=4)
    parser.add_argument("--l1-weight", type=float, default=0.0)
    args = parser.parse_args()

    rows = run_suite(args)

    print(f"{'seed':>4}  {'eig bound':>14}  {'tr cost':>14}  {'cg cost':>14}  "
          f"{'tr it':>5}  {'cg it':>5}  {'tr acc':>6}  {'cg acc':>6}")
    for row in rows:
        tr, cg = row["tr"], row["cg"]
        print(f"{row['seed']:>4}  {row['bound']:>14.6f}  {tr['cost']:>14.6f}  "
              f"{cg['cost']:>14.6f}  {tr['iters']:>5}  {cg['iters']:>5}  "
              f"{tr['acc']:>6.4f}  {cg['acc']:>6.4f}")

    tr_costs = [r["tr"]["cost"] for r in rows]
    cg_costs = [r["cg"]["cost"] for r in rows]
    print(f"\nmedian cost  tr {np.median(tr_costs):.6f}  cg {np.median(cg_costs):.6f}")
    print(f"mean acc     tr {np.mean([r['tr']['acc'] for r in rows]):.4f}  "
          f"cg {np.mean([r['cg']['acc'] for r in rows]):.4f}")


if __name__ == "__main__":
    main()
