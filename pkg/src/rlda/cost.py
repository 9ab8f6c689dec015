"""Discriminant subspace objective and its Euclidean/Riemannian derivatives.

The objective over a D x d frame U is

    f(U) = tr(U^T (S_w - S_b) U) + lambda * ||U||_1,

minimized over one of the manifold kinds in `manifolds`.  Minimizing the
trace term pushes U toward directions of small within-class and large
between-class scatter; the optional elementwise L1 term promotes sparse
loadings and is only available on the Stiefel kinds (it is not invariant
under frame rotations, so quotient kinds reject it).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ContractViolation
from .manifolds import ManifoldKind, StiefelPoint, TangentVector, project_tangent
from .scatter import ScatterPair

# Feasibility gate used by cost evaluation on solver iterates.  Looser than the
# constructor-fresh 1e-10 frame tolerance: iterates of the generalized kinds
# carry Cholesky roundoff proportional to cond(G).
EVAL_POINT_TOL = 1e-8


class HessianMode(Enum):
    # plain tangent projection of the Euclidean Hessian-vector product
    PROJECTED = "projected"
    # additionally subtracts the frame-curvature term (self-adjoint on the
    # tangent space; the default for trust-region solves)
    CORRECTED = "corrected"


@dataclass(frozen=True)
class DiscriminantProblem:
    scatter: ScatterPair
    manifold: ManifoldKind
    l1_weight: float = 0.0
    hessian_mode: HessianMode = HessianMode.CORRECTED
    _diff: np.ndarray = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not np.isfinite(self.l1_weight) or self.l1_weight < 0:
            raise ContractViolation(f"l1_weight must be finite and >= 0, got {self.l1_weight}")
        if self.l1_weight > 0 and self.manifold.is_quotient:
            raise ContractViolation(
                "the L1 term is not rotation-invariant; use a Stiefel kind for sparse fits"
            )
        if self.manifold.is_generalized and self.manifold.metric_matrix.shape[0] != self.scatter.dim:
            raise ContractViolation("metric matrix dimension does not match the scatter matrices")
        diff = self.scatter.s_w - self.scatter.s_b
        diff.setflags(write=False)
        object.__setattr__(self, "_diff", diff)

    @property
    def dim(self) -> int:
        return self.scatter.dim


def _check_eval_point(problem: DiscriminantProblem, point: StiefelPoint) -> None:
    if point.kind != problem.manifold:
        raise ContractViolation("point lives on a different manifold kind than the problem")
    if point.matrix.shape[0] != problem.dim:
        raise ContractViolation(
            f"point has {point.matrix.shape[0]} rows but the problem is {problem.dim}-dimensional"
        )
    u = point.matrix
    if problem.manifold.is_generalized:
        gram = u.T @ (problem.manifold.metric_matrix @ u)
    else:
        gram = u.T @ u
    err = np.linalg.norm(gram - np.eye(u.shape[1]))
    if not np.isfinite(err) or err > EVAL_POINT_TOL:
        raise ContractViolation(f"frame is off the manifold: residual {err:.3e} > {EVAL_POINT_TOL:g}")


def cost(problem: DiscriminantProblem, point: StiefelPoint) -> float:
    """Objective value tr(U^T (S_w - S_b) U) + lambda ||U||_1."""
    _check_eval_point(problem, point)
    u = point.matrix
    value = float(np.sum(u * (problem._diff @ u)))
    if problem.l1_weight > 0:
        value += problem.l1_weight * float(np.abs(u).sum())
    return value


def euclidean_grad(problem: DiscriminantProblem, point: StiefelPoint) -> np.ndarray:
    """Ambient gradient 2 S_w U - 2 S_b U + lambda sgn(U), with sgn(0) = 0."""
    u = point.matrix
    g = 2.0 * (problem._diff @ u)
    if problem.l1_weight > 0:
        g = g + problem.l1_weight * np.sign(u)
    return g


def riemannian_grad(problem: DiscriminantProblem, point: StiefelPoint) -> TangentVector:
    """Tangent projection of the ambient gradient at point."""
    _check_eval_point(problem, point)
    return project_tangent(point, euclidean_grad(problem, point))


def euclidean_hess_vec(
    problem: DiscriminantProblem, point: StiefelPoint, xi: TangentVector
) -> np.ndarray:
    """Ambient Hessian-vector product 2 (S_w - S_b) xi + 2 lambda mask(U) * xi.

    The L1 curvature surrogate acts only where U is exactly zero (where the
    subgradient model places all its curvature), realized as an elementwise
    mask on xi.
    """
    h = 2.0 * (problem._diff @ xi.matrix)
    if problem.l1_weight > 0:
        mask = (point.matrix == 0.0).astype(float)
        h = h + 2.0 * problem.l1_weight * (mask * xi.matrix)
    return h


def riemannian_hess_vec(
    problem: DiscriminantProblem, point: StiefelPoint, xi: TangentVector
) -> TangentVector:
    """Riemannian Hessian-vector product in the problem's hessian_mode.

    PROJECTED is the plain tangent projection of the ambient product.
    CORRECTED additionally subtracts project(xi * sym(U^T egrad)), the
    curvature term of the embedded-submanifold Hessian, and is self-adjoint
    on the tangent space (exactly so when the metric matrix is the identity).
    """
    _check_eval_point(problem, point)
    projected = project_tangent(point, euclidean_hess_vec(problem, point, xi))
    if problem.hessian_mode is HessianMode.PROJECTED:
        return projected
    eg = euclidean_grad(problem, point)
    s = point.matrix.T @ eg
    correction = project_tangent(point, xi.matrix @ ((s + s.T) / 2.0))
    return TangentVector(projected.matrix - correction.matrix, point)


def scatter_metric(s_w: np.ndarray) -> np.ndarray:
    """Ridge-stabilized within-class scatter, the default generalized metric.

    Returns S_w + eps I with eps = 1e-8 tr(S_w)/D, floored at 1e-12 so the
    result stays positive definite when the within-class scatter vanishes.
    """
    s_w = np.asarray(s_w, dtype=float)
    d = s_w.shape[0]
    eps = 1e-8 * float(np.trace(s_w)) / d
    if eps <= 0.0:
        eps = 1e-12
    return s_w + eps * np.eye(d)
