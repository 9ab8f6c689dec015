"""Desk-scale verification suites behind the `check` CLI subcommand.

Each suite draws seeded random instances, tests one mathematical contract
against an independent computation (eigensolver, finite differences, brute
force), and reports pass/fail with a short detail string.  The suites call
`cost`/`manifolds` through their modules so a deliberately corrupted function
(a canary) is caught rather than bypassed.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import cost as cost_mod
from . import manifolds as man
from . import optimizers
from .errors import ContractViolation
from .scatter import LabeledDataset, scatter_matrices

ALL_KINDS = (
    man.ManifoldVariant.STIEFEL,
    man.ManifoldVariant.GRASSMANN,
    man.ManifoldVariant.GENERALIZED_STIEFEL,
    man.ManifoldVariant.GENERALIZED_GRASSMANN,
)


def random_spd(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    s = a @ a.T / dim
    return scale * (s + s.T) / 2.0


def random_kind(rng: np.random.Generator, variant: man.ManifoldVariant, dim: int) -> man.ManifoldKind:
    if variant in (man.ManifoldVariant.GENERALIZED_STIEFEL, man.ManifoldVariant.GENERALIZED_GRASSMANN):
        g = random_spd(rng, dim) + 0.5 * np.eye(dim)
        return man.ManifoldKind(variant, g)
    return man.ManifoldKind(variant)


def random_problem(
    rng: np.random.Generator,
    dim: int,
    variant: man.ManifoldVariant = man.ManifoldVariant.STIEFEL,
    l1_weight: float = 0.0,
    identity_metric: bool = False,
) -> cost_mod.DiscriminantProblem:
    pair = _random_pair(rng, dim)
    if variant in (man.ManifoldVariant.GENERALIZED_STIEFEL, man.ManifoldVariant.GENERALIZED_GRASSMANN):
        g = np.eye(dim) if identity_metric else random_spd(rng, dim) + 0.5 * np.eye(dim)
        kind = man.ManifoldKind(variant, g)
    else:
        kind = man.ManifoldKind(variant)
    return cost_mod.DiscriminantProblem(pair, kind, l1_weight)


def _random_pair(rng: np.random.Generator, dim: int):
    from .scatter import ScatterPair

    return ScatterPair(random_spd(rng, dim), random_spd(rng, dim))


def _random_dataset(rng: np.random.Generator) -> LabeledDataset:
    d = int(rng.integers(1, 12))
    c = int(rng.integers(2, 6))
    counts = rng.integers(1, 9, size=c)
    labels = np.repeat(np.arange(c), counts)
    data = rng.standard_normal((d, labels.shape[0])) * rng.uniform(0.5, 3.0)
    return LabeledDataset.from_arrays(data, labels)


def check_scatter_decomposition(seeds: int) -> tuple[bool, str]:
    """s_w + s_b must equal the total scatter to 1e-10 relative Frobenius."""
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        ds = _random_dataset(rng)
        pair = scatter_matrices(ds)
        centered = ds.data - ds.data.mean(axis=1, keepdims=True)
        total = centered @ centered.T
        scale = max(np.linalg.norm(total), np.finfo(float).tiny)
        worst = max(worst, np.linalg.norm(pair.s_w + pair.s_b - total) / scale)
    return worst <= 1e-10, f"worst relative residual {worst:.2e} over {seeds} datasets"


def check_projection_idempotent(seeds: int) -> tuple[bool, str]:
    """Projecting twice equals projecting once, and outputs are tangent."""
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(4, 16))
        d_sub = int(rng.integers(1, min(5, d_amb)))
        for variant in ALL_KINDS:
            kind = random_kind(rng, variant, d_amb)
            point = man.random_point(d_amb, d_sub, seed, kind)
            z = rng.standard_normal((d_amb, d_sub))
            once = man.project_tangent(point, z)
            twice = man.project_tangent(point, once.matrix)
            worst = max(worst, float(np.linalg.norm(twice.matrix - once.matrix)))
            man.check_tangent(once, tol=1e-8)
    return worst <= 1e-12, f"worst idempotence gap {worst:.2e} over {seeds} seeds x 4 kinds"


def check_metric_compatibility(seeds: int) -> tuple[bool, str]:
    """Projection is self-adjoint in the ambient inner product of its kind.

    The ambient inner product is tr(a^T b) for the plain kinds and tr(a^T G b)
    for the generalized kinds (the product their projector is orthogonal in).
    """
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(4, 16))
        d_sub = int(rng.integers(1, min(5, d_amb)))
        for variant in ALL_KINDS:
            kind = random_kind(rng, variant, d_amb)
            point = man.random_point(d_amb, d_sub, seed, kind)
            z = rng.standard_normal((d_amb, d_sub))
            eta = man.project_tangent(point, rng.standard_normal((d_amb, d_sub)))
            pz = man.project_tangent(point, z)
            if kind.is_generalized:
                lhs = float(np.sum(pz.matrix * (kind.metric_matrix @ eta.matrix)))
                rhs = float(np.sum(z * (kind.metric_matrix @ eta.matrix)))
            else:
                lhs = float(np.sum(pz.matrix * eta.matrix))
                rhs = float(np.sum(z * eta.matrix))
            worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"worst self-adjointness gap {worst:.2e}"


def check_retraction(seeds: int) -> tuple[bool, str]:
    """Retraction axioms: R(0) = U and d/dt R(t xi) = xi at t = 0."""
    worst_zero, worst_rigid = 0.0, 0.0
    t = 1e-6
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(4, 16))
        d_sub = int(rng.integers(1, min(5, d_amb)))
        for variant in ALL_KINDS:
            kind = random_kind(rng, variant, d_amb)
            point = man.random_point(d_amb, d_sub, seed, kind)
            zero = man.TangentVector(np.zeros((d_amb, d_sub)), point)
            worst_zero = max(
                worst_zero, float(np.linalg.norm(man.retract(point, zero).matrix - point.matrix))
            )
            xi = man.project_tangent(point, rng.standard_normal((d_amb, d_sub)))
            if xi.norm < 1e-12:
                continue
            xi = man.TangentVector(xi.matrix / xi.norm, point)
            stepped = man.retract(point, man.TangentVector(t * xi.matrix, point))
            fd = (stepped.matrix - point.matrix) / t
            worst_rigid = max(worst_rigid, float(np.linalg.norm(fd - xi.matrix)))
    ok = worst_zero <= 1e-12 and worst_rigid <= 1e-6
    return ok, f"zero-step gap {worst_zero:.2e}, rigidity gap {worst_rigid:.2e}"


def check_gradient_fd(seeds: int) -> tuple[bool, str]:
    """Riemannian gradient vs central differences of the retraction pullback."""
    worst = 0.0
    t = 1e-6
    count = 0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(6, 16))
        d_sub = int(rng.integers(1, 5))
        variant = ALL_KINDS[seed % len(ALL_KINDS)]
        problem = random_problem(rng, d_amb, variant, identity_metric=True)
        point = man.random_point(d_amb, d_sub, seed, problem.manifold)
        grad = cost_mod.riemannian_grad(problem, point)
        if grad.norm < 1e-9:
            continue
        xi = _well_conditioned_direction(rng, point, grad, min_cos=0.01)
        fplus = cost_mod.cost(problem, man.retract(point, man.TangentVector(t * xi, point)))
        fminus = cost_mod.cost(problem, man.retract(point, man.TangentVector(-t * xi, point)))
        fd = (fplus - fminus) / (2.0 * t)
        ip = man.inner(point, grad, man.TangentVector(xi, point))
        worst = max(worst, abs(fd - ip) / max(abs(ip), 1e-300))
        count += 1
    return worst <= 1e-5, f"worst relative error {worst:.2e} over {count} draws"


def _well_conditioned_direction(
    rng: np.random.Generator, point: man.StiefelPoint, grad: man.TangentVector, min_cos: float
) -> np.ndarray:
    """Unit tangent direction not nearly orthogonal to the gradient.

    Directions nearly orthogonal to grad make the relative finite-difference
    error ill-conditioned, so those rare draws are rejected.
    """
    for _ in range(64):
        xi = man.project_tangent(point, rng.standard_normal(point.matrix.shape))
        n = xi.norm
        if n < 1e-12:
            continue
        unit = xi.matrix / n
        cos = abs(float(np.sum(unit * grad.matrix))) / grad.norm
        if cos >= min_cos:
            return unit
    return grad.matrix / grad.norm


def check_hessian_selfadjoint(seeds: int) -> tuple[bool, str]:
    """Corrected-mode Hessian is self-adjoint on the tangent space."""
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(6, 16))
        d_sub = int(rng.integers(1, 5))
        variant = (man.ManifoldVariant.STIEFEL, man.ManifoldVariant.GRASSMANN)[seed % 2]
        problem = random_problem(rng, d_amb, variant)
        point = man.random_point(d_amb, d_sub, seed, problem.manifold)
        xi = man.project_tangent(point, rng.standard_normal((d_amb, d_sub)))
        eta = man.project_tangent(point, rng.standard_normal((d_amb, d_sub)))
        if xi.norm > 0:
            xi = man.TangentVector(xi.matrix / xi.norm, point)
        if eta.norm > 0:
            eta = man.TangentVector(eta.matrix / eta.norm, point)
        hxi = cost_mod.riemannian_hess_vec(problem, point, xi)
        heta = cost_mod.riemannian_hess_vec(problem, point, eta)
        gap = abs(man.inner(point, hxi, eta) - man.inner(point, xi, heta))
        worst = max(worst, gap)
    return worst <= 1e-8, f"worst adjointness gap {worst:.2e} over {seeds} draws"


def check_kyfan(seeds: int) -> tuple[bool, str]:
    """Solvers reach the eigenvalue lower bound of the trace objective.

    For lambda = 0 on the Stiefel manifold the minimum of tr(U^T M U) equals
    the sum of the d smallest eigenvalues of M (independent eigensolver).
    Trust region must land within 1e-6 on every seed, conjugate gradient
    within 1e-4 on all but at most one.
    """
    d_amb, d_sub = 20, 5
    tr_bad, cg_bad = 0, 0
    worst_tr, worst_cg = 0.0, 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        problem = random_problem(rng, d_amb, man.ManifoldVariant.STIEFEL)
        target = float(np.sort(np.linalg.eigvalsh(problem.scatter.s_w - problem.scatter.s_b))[:d_sub].sum())
        init = man.random_point(d_amb, d_sub, seed + 1000, problem.manifold)
        gap_tr = optimizers.solve_tr(problem, init).final_cost - target
        gap_cg = optimizers.solve_cg(problem, init).final_cost - target
        worst_tr = max(worst_tr, gap_tr)
        worst_cg = max(worst_cg, gap_cg)
        tr_bad += gap_tr > 1e-6
        cg_bad += gap_cg > 1e-4
    ok = tr_bad == 0 and cg_bad <= max(1, seeds // 10)
    return ok, f"worst gap tr {worst_tr:.2e} (fails {tr_bad}), cg {worst_cg:.2e} (fails {cg_bad})"


def check_cg_descent(seeds: int) -> tuple[bool, str]:
    """Conjugate-gradient cost traces are strictly decreasing."""
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        problem = random_problem(rng, 16, man.ManifoldVariant.STIEFEL)
        init = man.random_point(16, 3, seed, problem.manifold)
        trace = optimizers.solve_cg(problem, init).cost_trace
        if not (np.diff(trace) < 0).all():
            return False, f"non-decreasing step at seed {seed}"
    return True, f"strict descent on {seeds} seeds"


def check_grassmann_invariance(seeds: int) -> tuple[bool, str]:
    """Cost and gradient norm are invariant under frame rotations."""
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        d_amb = int(rng.integers(6, 16))
        d_sub = int(rng.integers(2, 5))
        problem = random_problem(rng, d_amb, man.ManifoldVariant.GRASSMANN)
        point = man.random_point(d_amb, d_sub, seed, problem.manifold)
        q, r = np.linalg.qr(rng.standard_normal((d_sub, d_sub)))
        q = q * np.sign(np.diag(r))
        rotated = man.StiefelPoint(point.matrix @ q, problem.manifold)
        worst = max(worst, abs(cost_mod.cost(problem, point) - cost_mod.cost(problem, rotated)))
        g1 = cost_mod.riemannian_grad(problem, point).norm
        g2 = cost_mod.riemannian_grad(problem, rotated).norm
        worst = max(worst, abs(g1 - g2))
    return worst <= 1e-9, f"worst rotation gap {worst:.2e}"


SUITES: dict[str, Callable[[int], tuple[bool, str]]] = {
    "scatter-decomposition": check_scatter_decomposition,
    "projection-idempotence": check_projection_idempotent,
    "metric-compatibility": check_metric_compatibility,
    "retraction": check_retraction,
    "gradient-fd": check_gradient_fd,
    "hessian-selfadjoint": check_hessian_selfadjoint,
    "kyfan": check_kyfan,
    "cg-descent": check_cg_descent,
    "grassmann-invariance": check_grassmann_invariance,
}

DEFAULT_SEEDS = {
    "scatter-decomposition": 50,
    "projection-idempotence": 25,
    "metric-compatibility": 25,
    "retraction": 25,
    "gradient-fd": 100,
    "hessian-selfadjoint": 100,
    "kyfan": 10,
    "cg-descent": 5,
    "grassmann-invariance": 25,
}


def run_suites(names: list[str] | None = None, seeds: int | None = None) -> list[tuple[str, bool, str]]:
    chosen = list(SUITES) if not names else names
    results = []
    for name in chosen:
        if name not in SUITES:
            raise ContractViolation(f"unknown check suite {name!r}; known: {', '.join(SUITES)}")
        count = seeds if seeds is not None else DEFAULT_SEEDS[name]
        ok, detail = SUITES[name](count)
        results.append((name, ok, detail))
    return results
