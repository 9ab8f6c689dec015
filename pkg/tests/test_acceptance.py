"""Acceptance gate: nine numbered criteria, each printing one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines inline.
The suite-level criteria (5, 6, 9) share the synthetic benchmark: D = 64,
C = 5, 100 samples/class, class-mean spread 4x the within-class std, d = 4.
"""
import json
import os
import time

import numpy as np
import pytest

import rlda
from rlda import checks
from rlda.cli import main
from rlda.evaluation import _derive_seed, _stratified_folds

SUITE = dict(dim=64, n_classes=5, per_class=100, spread=4.0, within_std=1.0)
SUITE_D = 4


def _verdict(number, name, ok, detail):
    line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def _suite_dataset(seed):
    return rlda.synth_gaussian_classes(
        SUITE["dim"], SUITE["n_classes"], SUITE["per_class"],
        SUITE["spread"], SUITE["within_std"], seed,
    )


def _suite_problem(ds, l1_weight=0.0):
    return rlda.DiscriminantProblem(rlda.scatter_matrices(ds), rlda.stiefel(), l1_weight)


def _cluster_acc(ds, point, seed):
    feats = rlda.project_features(point, ds.data)
    assign = rlda.kmeans(feats, ds.n_classes, n_init=10, seed=seed)
    return rlda.clustering_accuracy(assign, ds.labels)


def test_criterion_1_kyfan_oracle():
    # 10 seeded problems, D = 20, d = 5: trust region within 1e-6 of the sum
    # of the 5 smallest eigenvalues on every seed, conjugate gradient within
    # 1e-4 on at least 9, all inside a 5 second budget
    start = time.perf_counter()
    ok, detail = checks.check_kyfan(10)
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 5.0
    _verdict(1, "eigenvalue oracle", ok, f"{detail}, {elapsed:.2f}s")


def test_criterion_2_derivatives():
    # 100 draws each: gradient vs finite differences at relative 1e-5, and
    # corrected-mode Hessian self-adjointness within 1e-8
    ok_g, detail_g = checks.check_gradient_fd(100)
    ok_h, detail_h = checks.check_hessian_selfadjoint(100)
    _verdict(2, "derivative correctness", ok_g and ok_h, f"{detail_g}; {detail_h}")


def test_criterion_3_scatter_decomposition():
    # S_W + S_B = S_T within 1e-10 relative Frobenius on 50 random datasets
    ok, detail = checks.check_scatter_decomposition(50)
    _verdict(3, "scatter decomposition", ok, detail)


def test_criterion_4_cg_termination_contract():
    # with the default tolerance 1e-5 and cap 200, every run ends with the
    # squared gradient norm at tolerance or exactly 200 iterations, and the
    # recorded cost trace is strictly decreasing
    worst_iters, bad = 0, 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(8, 24))
        d_sub = int(rng.integers(1, 6))
        problem = checks.random_problem(rng, dim)
        init = rlda.random_point(dim, d_sub, seed + 500, problem.manifold)
        res = rlda.solve_cg(problem, init)
        stopped = res.grad_norm_trace[-1] ** 2 <= 1e-5 or res.iterations == 200
        strict = bool((np.diff(res.cost_trace) < 0).all())
        bad += not (stopped and strict)
        worst_iters = max(worst_iters, res.iterations)
    _verdict(
        4, "first-order termination", bad == 0,
        f"{20 - bad}/20 runs stop at tolerance or the cap with strict descent "
        f"(longest run {worst_iters} iterations)",
    )


def test_criterion_5_second_order_beats_first_order():
    # on the synthetic suite the trust region's median final cost is at most
    # the conjugate gradient's, and its mean clustering accuracy trails by
    # no more than 0.02
    tr_costs, cg_costs, tr_accs, cg_accs = [], [], [], []
    for seed in range(10):
        ds = _suite_dataset(seed)
        problem = _suite_problem(ds)
        init = rlda.random_point(SUITE["dim"], SUITE_D, seed + 900, problem.manifold)
        res_tr = rlda.solve_tr(problem, init)
        res_cg = rlda.solve_cg(problem, init)
        tr_costs.append(res_tr.final_cost)
        cg_costs.append(res_cg.final_cost)
        tr_accs.append(_cluster_acc(ds, res_tr.point, seed + 70))
        cg_accs.append(_cluster_acc(ds, res_cg.point, seed + 70))
    med_tr, med_cg = float(np.median(tr_costs)), float(np.median(cg_costs))
    acc_tr, acc_cg = float(np.mean(tr_accs)), float(np.mean(cg_accs))
    ok = med_tr <= med_cg and acc_tr >= acc_cg - 0.02
    _verdict(
        5, "second order vs first order", ok,
        f"median cost tr {med_tr:.6f} vs cg {med_cg:.6f}, mean acc tr {acc_tr:.4f} vs cg {acc_cg:.4f}",
    )


def test_criterion_6_end_to_end_clustering():
    # full pipeline on the suite: clustering accuracy at least 0.95 and NMI
    # at least 0.90 over 10 repeats, and a k-means baseline on the raw
    # features (same shuffles, folds, and seeds) scores strictly lower
    ds = _suite_dataset(0)
    config = rlda.PipelineConfig(
        solver="tr", subspace_dim=SUITE_D, repeats=10, folds=5, seed=123
    )
    report = rlda.run_experiment(ds, config)

    raw_accs = []
    for repeat in range(config.repeats):
        rng = np.random.default_rng([config.seed, repeat])
        perm = rng.permutation(ds.n_samples)
        data, labels = ds.data[:, perm], ds.labels[perm]
        per_fold = []
        for f, test_idx in enumerate(_stratified_folds(labels, config.folds, rng)):
            assign = rlda.kmeans(
                data[:, test_idx], ds.n_classes, n_init=10,
                seed=_derive_seed(config.seed, repeat, f, 1),
            )
            per_fold.append(rlda.clustering_accuracy(assign, labels[test_idx]))
        raw_accs.append(float(np.mean(per_fold)))
    raw_acc = float(np.mean(raw_accs))

    ok = report.acc_mean >= 0.95 and report.nmi_mean >= 0.90 and raw_acc < report.acc_mean
    _verdict(
        6, "end-to-end clustering", ok,
        f"acc {report.acc_mean:.4f} (>= 0.95), nmi {report.nmi_mean:.4f} (>= 0.90), "
        f"raw baseline {raw_acc:.4f} strictly lower",
    )


@pytest.mark.skipif(
    not (os.environ.get("RLDA_USPS_IMAGES") and os.environ.get("RLDA_USPS_LABELS")),
    reason="set RLDA_USPS_IMAGES and RLDA_USPS_LABELS to run the real-data smoke test",
)
def test_criterion_7_usps_smoke():
    # user-supplied digit images: the pipeline must run end to end; accuracy
    # outside [0.70, 0.95] is logged, not failed
    raw = rlda.load_idx(os.environ["RLDA_USPS_IMAGES"], os.environ["RLDA_USPS_LABELS"])
    ds = rlda.preprocess(raw, shuffle_seed=0)
    config = rlda.PipelineConfig(solver="tr", repeats=3, folds=5, seed=0)
    report = rlda.run_experiment(ds, config)
    in_range = 0.70 <= report.acc_mean <= 0.95
    note = "" if in_range else " (outside [0.70, 0.95]; logged, not failed)"
    _verdict(
        7, "real-data smoke", True,
        f"pipeline ran on {ds.n_samples} samples, acc {report.acc_mean:.4f}{note}",
    )


def test_criterion_8_cli_determinism(tmp_path):
    # two identical fit-eval invocations write byte-identical reports
    data = str(tmp_path / "data.csv")
    assert main(
        ["synth", "--dim", "16", "--classes", "3", "--per-class", "20",
         "--seed", "7", "--out", data]
    ) == 0
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        code = main(
            ["fit-eval", "--data", data, "--solver", "tr", "--repeats", "3",
             "--folds", "3", "--seed", "11", "--out", str(out)]
        )
        assert code == 0
        outs.append((out / "report.json").read_bytes())
    ok = outs[0] == outs[1]
    _verdict(8, "deterministic reports", ok, f"report.json identical over 2 runs ({len(outs[0])} bytes)")


def test_criterion_9_sparsity_sweep():
    # sweeping the sparsity weight over {0, 1e-3, 1e-2} on the suite: the
    # fraction of |U_ij| < 1e-3 entries never decreases, and accuracy at
    # 1e-3 stays within 0.05 of the unregularized run
    lambdas = (0.0, 1e-3, 1e-2)
    fractions = {lam: [] for lam in lambdas}
    accs = {lam: [] for lam in lambdas}
    for seed in range(10):
        ds = _suite_dataset(seed)
        init = rlda.random_point(SUITE["dim"], SUITE_D, seed + 900, rlda.stiefel())
        for lam in lambdas:
            res = rlda.solve_cg(_suite_problem(ds, lam), init)
            fractions[lam].append(float(np.mean(np.abs(res.point.matrix) < 1e-3)))
            accs[lam].append(_cluster_acc(ds, res.point, seed + 70))
    means = [float(np.mean(fractions[lam])) for lam in lambdas]
    acc0, acc3 = float(np.mean(accs[0.0])), float(np.mean(accs[1e-3]))
    ok = means[0] <= means[1] <= means[2] and abs(acc3 - acc0) <= 0.05
    _verdict(
        9, "sparsity sweep sanity", ok,
        f"near-zero fractions {means[0]:.4f} <= {means[1]:.4f} <= {means[2]:.4f}, "
        f"acc {acc0:.4f} -> {acc3:.4f}",
    )
