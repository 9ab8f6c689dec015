"""Clustering/classification evaluation of learned discriminant subspaces.

Provides feature projection, a deterministic Lloyd k-means with k-means++
restarts, clustering accuracy via Hungarian matching, normalized mutual
information, a small exact kNN classifier, and `run_experiment`, the
shuffle/K-fold pipeline that aggregates the metrics over seeded repeats.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.optimize

from . import optimizers
from .cost import DiscriminantProblem, HessianMode, scatter_metric
from .errors import ConfigError, ContractViolation
from .manifolds import ManifoldKind, ManifoldVariant, StiefelPoint, random_point
from .scatter import LabeledDataset, ScatterPair, scatter_matrices


def project_features(point: StiefelPoint, data: np.ndarray) -> np.ndarray:
    """Project feature columns onto the learned subspace: U^T X."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] != point.matrix.shape[0]:
        raise ContractViolation(
            f"data must be {point.matrix.shape[0]} x N, got shape {data.shape}"
        )
    return point.matrix.T @ data


def _wcss(points: np.ndarray, centers: np.ndarray, assign: np.ndarray) -> float:
    return float(np.sum((points - centers[assign]) ** 2))


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted draws after a uniform first center."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 300) -> tuple[np.ndarray, float]:
    n, k = points.shape[0], centers.shape[0]
    prev_obj = np.inf
    assign = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_assign = np.argmin(d2, axis=1)

        # re-seed any empty cluster from the point farthest from its center
        for j in range(k):
            if not (new_assign == j).any():
                dist = np.sum((points - centers[new_assign]) ** 2, axis=1)
                far = int(np.argmax(dist))
                centers[j] = points[far]
                new_assign[far] = j

        obj = _wcss(points, centers, new_assign)
        # Lloyd iterations never increase the objective (up to roundoff)
        assert obj <= prev_obj + 1e-9 * max(1.0, abs(prev_obj) if np.isfinite(prev_obj) else 1.0)
        converged = (new_assign == assign).all() and np.isfinite(prev_obj)
        assign = new_assign
        prev_obj = obj
        if converged:
            break
        for j in range(k):
            members = points[assign == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)
    return assign, _wcss(points, centers, assign)


def kmeans(features: np.ndarray, k: int, n_init: int = 10, seed: int = 0) -> np.ndarray:
    """Deterministic k-means on feature columns (d x N); returns assignments.

    Runs n_init k-means++ seeded Lloyd passes from one seeded generator and
    keeps the assignment with the lowest within-cluster sum of squares (the
    earliest run wins ties).
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise ContractViolation("features must be d x N")
    n = features.shape[1]
    if k < 1 or k > n:
        raise ContractViolation(f"need 1 <= k <= {n}, got k={k}")
    if n_init < 1:
        raise ContractViolation("n_init must be at least 1")
    points = features.T.copy()
    rng = np.random.default_rng(seed)
    best_assign, best_obj = None, np.inf
    for _ in range(n_init):
        centers = _kmeans_pp_init(points, k, rng)
        assign, obj = _lloyd(points, centers)
        if obj < best_obj:
            best_assign, best_obj = assign, obj
    return best_assign


def _contingency(assignments: np.ndarray, truth: np.ndarray) -> np.ndarray:
    assignments = np.asarray(assignments)
    truth = np.asarray(truth)
    if assignments.shape != truth.shape or assignments.ndim != 1:
        raise ContractViolation("assignments and truth must be matching 1-d arrays")
    if assignments.size == 0:
        raise ContractViolation("empty labelings")
    k = int(assignments.max()) + 1
    c = int(truth.max()) + 1
    table = np.zeros((k, c), dtype=np.int64)
    np.add.at(table, (assignments, truth), 1)
    return table


def clustering_accuracy(assignments: np.ndarray, truth: np.ndarray) -> float:
    """Best-matching accuracy: Hungarian assignment on the contingency table."""
    table = _contingency(assignments, truth)
    rows, cols = scipy.optimize.linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / float(truth.shape[0])


def nmi(assignments: np.ndarray, truth: np.ndarray) -> float:
    """Normalized mutual information I/sqrt(Ha*Ht), natural log.

    Constant labelings have zero entropy: if both sides are constant the
    partitions coincide and the score is 1, if only one side is constant the
    score is 0.
    """
    table = _contingency(assignments, truth).astype(float)
    n = table.sum()
    pa = table.sum(axis=1) / n
    pt = table.sum(axis=0) / n
    ha = -np.sum(pa[pa > 0] * np.log(pa[pa > 0]))
    ht = -np.sum(pt[pt > 0] * np.log(pt[pt > 0]))
    if ha == 0.0 and ht == 0.0:
        return 1.0
    if ha == 0.0 or ht == 0.0:
        return 0.0
    pij = table / n
    outer = pa[:, None] * pt[None, :]
    nz = pij > 0
    info = float(np.sum(pij[nz] * np.log(pij[nz] / outer[nz])))
    return info / float(np.sqrt(ha * ht))


def knn_classify(
    train_features: np.ndarray,
    train_labels: np.ndarray,
    test_features: np.ndarray,
    k_neighbors: int = 1,
) -> np.ndarray:
    """Euclidean k-nearest-neighbor majority vote over feature columns.

    Vote ties go to the candidate class with the smallest mean neighbor
    distance, then to the lowest class index.
    """
    train = np.asarray(train_features, dtype=float)
    test = np.asarray(test_features, dtype=float)
    labels = np.asarray(train_labels)
    if train.ndim != 2 or test.ndim != 2 or train.shape[0] != test.shape[0]:
        raise ContractViolation("train and test features must be d x N with matching d")
    n_train = train.shape[1]
    if labels.shape != (n_train,):
        raise ContractViolation("train_labels length does not match train features")
    if not (1 <= k_neighbors <= n_train):
        raise ContractViolation(f"need 1 <= k_neighbors <= {n_train}, got {k_neighbors}")

    d2 = (
        np.sum(test**2, axis=0)[:, None]
        - 2.0 * test.T @ train
        + np.sum(train**2, axis=0)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k_neighbors]
    out = np.empty(test.shape[1], dtype=labels.dtype)
    for i in range(test.shape[1]):
        neigh = order[i]
        votes = labels[neigh]
        classes, counts = np.unique(votes, return_counts=True)
        top = classes[counts == counts.max()]
        if top.shape[0] == 1:
            out[i] = top[0]
            continue
        dists = np.sqrt(d2[i, neigh])
        means = np.array([dists[votes == c].mean() for c in top])
        winners = top[means == means.min()]
        out[i] = winners.min()
    return out


def euclidean_lda_basis(pair: ScatterPair, dim_subspace: int) -> np.ndarray:
    """Classical discriminant directions from the generalized eigenproblem.

    Solves S_b v = w S_w v (ridge-stabilized) and returns the D x d matrix of
    eigenvectors with largest eigenvalues.  A flat-space comparison anchor,
    not part of the manifold pipeline.
    """
    if not (1 <= dim_subspace <= pair.dim):
        raise ContractViolation(f"need 1 <= d <= {pair.dim}")
    w, v = scipy.linalg.eigh(pair.s_b, scatter_metric(pair.s_w))
    return v[:, ::-1][:, :dim_subspace]


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run_experiment needs besides the dataset."""

    solver: Literal["tr", "cg"] = "tr"
    manifold: ManifoldVariant = ManifoldVariant.STIEFEL
    subspace_dim: int | None = None  # None resolves to C - 1
    l1_weight: float = 0.0
    hessian_mode: HessianMode = HessianMode.CORRECTED
    repeats: int = 10
    folds: int = 5
    knn_k: int = 1
    kmeans_restarts: int = 10
    cluster_scope: Literal["test", "all"] = "test"
    seed: int = 0
    jobs: int = 1
    cg: optimizers.CgConfig = field(default_factory=optimizers.CgConfig)
    tr: optimizers.TrConfig = field(default_factory=optimizers.TrConfig)

    def __post_init__(self) -> None:
        if self.solver not in ("tr", "cg"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.cluster_scope not in ("test", "all"):
            raise ConfigError(f"unknown cluster_scope {self.cluster_scope!r}")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be at least 1")
        if self.kmeans_restarts < 1:
            raise ConfigError("kmeans_restarts must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


@dataclass(frozen=True)
class EvaluationReport:
    acc_mean: float
    acc_std: float
    nmi_mean: float
    nmi_std: float
    knn_acc_mean: float
    knn_acc_std: float
    repeats: int
    config_echo: dict
    acc_per_repeat: tuple[float, ...] = ()
    nmi_per_repeat: tuple[float, ...] = ()
    knn_per_repeat: tuple[float, ...] = ()
    # one (cost_trace, grad_norm_trace) pair per repeat, from the first solve
    traces: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...] = ()


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Round-robin class-stratified fold indices; every fold sees every class."""
    buckets: list[list[int]] = [[] for _ in range(folds)]
    for c in range(int(labels.max()) + 1):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.shape[0])]
        for j, i in enumerate(idx):
            buckets[j % folds].append(int(i))
    return [np.sort(np.asarray(b, dtype=np.int64)) for b in buckets]


def _build_kind(variant: ManifoldVariant, pair: ScatterPair) -> ManifoldKind:
    if variant in (ManifoldVariant.GENERALIZED_STIEFEL, ManifoldVariant.GENERALIZED_GRASSMANN):
        return ManifoldKind(variant, scatter_metric(pair.s_w))
    return ManifoldKind(variant)


def _fit(
    config: PipelineConfig, pair: ScatterPair, dim_subspace: int, init_seed: int
) -> optimizers.OptimizationResult:
    kind = _build_kind(config.manifold, pair)
    problem = DiscriminantProblem(pair, kind, config.l1_weight, config.hessian_mode)
    init = random_point(pair.dim, dim_subspace, init_seed, kind)
    if config.solver == "tr":
        return optimizers.solve_tr(problem, init, config.tr)
    return optimizers.solve_cg(problem, init, config.cg)


def _run_repeat(
    ds: LabeledDataset, config: PipelineConfig, dim_subspace: int, repeat: int
) -> tuple[float, float, float, tuple]:
    rng = np.random.default_rng([config.seed, repeat])
    perm = rng.permutation(ds.n_samples)
    data = ds.data[:, perm]
    labels = ds.labels[perm]
    fold_idx = _stratified_folds(labels, config.folds, rng)

    accs, nmis, knns = [], [], []
    first_trace: tuple | None = None
    for f, test_idx in enumerate(fold_idx):
        mask = np.ones(ds.n_samples, dtype=bool)
        mask[test_idx] = False
        train_idx = np.flatnonzero(mask)
        train = LabeledDataset.from_arrays(data[:, train_idx], labels[train_idx])
        pair = scatter_matrices(train)
        result = _fit(config, pair, dim_subspace, _derive_seed(config.seed, repeat, f, 0))
        if first_trace is None:
            first_trace = (
                tuple(float(v) for v in result.cost_trace),
                tuple(float(v) for v in result.grad_norm_trace),
            )
        train_feats = project_features(result.point, data[:, train_idx])
        test_feats = project_features(result.point, data[:, test_idx])
        predicted = knn_classify(train_feats, labels[train_idx], test_feats, config.knn_k)
        knns.append(float(np.mean(predicted == labels[test_idx])))
        if config.cluster_scope == "test":
            assign = kmeans(
                test_feats,
                ds.n_classes,
                n_init=config.kmeans_restarts,
                seed=_derive_seed(config.seed, repeat, f, 1),
            )
            accs.append(clustering_accuracy(assign, labels[test_idx]))
            nmis.append(nmi(assign, labels[test_idx]))

    if config.cluster_scope == "all":
        full = LabeledDataset.from_arrays(data, labels)
        pair = scatter_matrices(full)
        result = _fit(config, pair, dim_subspace, _derive_seed(config.seed, repeat, config.folds, 0))
        feats = project_features(result.point, data)
        assign = kmeans(
            feats,
            ds.n_classes,
            n_init=config.kmeans_restarts,
            seed=_derive_seed(config.seed, repeat, config.folds, 1),
        )
        accs.append(clustering_accuracy(assign, labels))
        nmis.append(nmi(assign, labels))

    return (
        float(np.mean(accs)),
        float(np.mean(nmis)),
        float(np.mean(knns)),
        first_trace,
    )


def run_experiment(ds: LabeledDataset, config: PipelineConfig) -> EvaluationReport:
    """Repeat-shuffle-split evaluation of a fitted discriminant subspace.

    Each repeat shuffles the samples with its own seed and walks the
    class-stratified K folds: fit the subspace on the training folds, project
    both sides, score kNN accuracy on the held-out fold, and (under the
    default "test" scope) k-means clustering accuracy and NMI on the held-out
    projections.  Scope "all" instead fits on all samples and clusters all
    projections once per repeat.  Metrics are averaged per repeat and
    aggregated as mean and population std over repeats.
    """
    if ds.n_classes < 2:
        raise ContractViolation("need at least two classes")
    dim_subspace = config.subspace_dim if config.subspace_dim is not None else ds.n_classes - 1
    if not (1 <= dim_subspace <= ds.n_features):
        raise ConfigError(f"subspace dim {dim_subspace} out of range for D={ds.n_features}")
    if int(ds.class_counts.min()) < config.folds:
        raise ConfigError(
            f"smallest class has {int(ds.class_counts.min())} samples, fewer than {config.folds} folds"
        )
    if config.l1_weight > 0 and config.manifold in (
        ManifoldVariant.GRASSMANN,
        ManifoldVariant.GENERALIZED_GRASSMANN,
    ):
        raise ConfigError("sparse fits require a Stiefel manifold kind")

    indices = list(range(config.repeats))
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(lambda r: _run_repeat(ds, config, dim_subspace, r), indices))
    else:
        rows = [_run_repeat(ds, config, dim_subspace, r) for r in indices]

    accs = np.array([r[0] for r in rows])
    nmis = np.array([r[1] for r in rows])
    knns = np.array([r[2] for r in rows])
    echo = {
        "solver": config.solver,
        "manifold": config.manifold.value,
        "subspace_dim": dim_subspace,
        "l1_weight": config.l1_weight,
        "hessian_mode": config.hessian_mode.value,
        "repeats": config.repeats,
        "folds": config.folds,
        "knn_k": config.knn_k,
        "kmeans_restarts": config.kmeans_restarts,
        "cluster_scope": config.cluster_scope,
        "seed": config.seed,
    }
    return EvaluationReport(
        acc_mean=float(accs.mean()),
        acc_std=float(accs.std()),
        nmi_mean=float(nmis.mean()),
        nmi_std=float(nmis.std()),
        knn_acc_mean=float(knns.mean()),
        knn_acc_std=float(knns.std()),
        repeats=config.repeats,
        config_echo=echo,
        acc_per_repeat=tuple(float(v) for v in accs),
        nmi_per_repeat=tuple(float(v) for v in nmis),
        knn_per_repeat=tuple(float(v) for v in knns),
        traces=tuple(r[3] for r in rows),
    )
