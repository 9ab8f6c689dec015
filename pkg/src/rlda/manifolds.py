"""Matrix-manifold primitives for orthonormal-frame optimization.

Implements the Stiefel manifold St(D, d) = {U : U^T U = I}, the Grassmann
manifold of d-dimensional subspaces (Stiefel points modulo rotations of the
frame), and their generalized variants where orthonormality is measured by a
symmetric positive definite matrix G (U^T G U = I).  Provides the tangent
projection, the metric, a QR-based retraction, projection vector transport,
and seeded random points.  All returned arrays are read-only; points and
tangent vectors are immutable value objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import ContractViolation, RetractionError

# Frobenius tolerance for the frame invariant U^T U = I (or U^T G U = I).
POINT_TOL = 1e-10
# Frobenius tolerance for tangency checks.
TANGENT_TOL = 1e-10
# Relative Frobenius tolerance for symmetry of the metric matrix.
METRIC_SYM_TOL = 1e-12


class ManifoldVariant(Enum):
    STIEFEL = "stiefel"
    GRASSMANN = "grassmann"
    GENERALIZED_STIEFEL = "generalized_stiefel"
    GENERALIZED_GRASSMANN = "generalized_grassmann"


_GENERALIZED = (ManifoldVariant.GENERALIZED_STIEFEL, ManifoldVariant.GENERALIZED_GRASSMANN)
_QUOTIENT = (ManifoldVariant.GRASSMANN, ManifoldVariant.GENERALIZED_GRASSMANN)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, order="C")
    out.setflags(write=False)
    return out


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class ManifoldKind:
    """Which manifold the frames live on, plus the metric matrix if generalized.

    metric_matrix must be present iff the variant is a generalized one; it is
    validated (symmetric to relative 1e-12, positive definite via Cholesky)
    and its Cholesky factorization is cached at construction.
    """

    variant: ManifoldVariant
    metric_matrix: np.ndarray | None = None
    _chol: object = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.is_generalized:
            g = self.metric_matrix
            if g is None:
                raise ContractViolation(f"{self.variant.value} requires a metric matrix")
            g = np.asarray(g, dtype=float)
            if g.ndim != 2 or g.shape[0] != g.shape[1]:
                raise ContractViolation(f"metric matrix must be square, got shape {g.shape}")
            scale = np.linalg.norm(g)
            if np.linalg.norm(g - g.T) > METRIC_SYM_TOL * max(scale, np.finfo(float).tiny):
                raise ContractViolation("metric matrix is not symmetric")
            try:
                chol = scipy.linalg.cho_factor(g, lower=True)
            except scipy.linalg.LinAlgError as exc:
                raise ContractViolation("metric matrix is not positive definite") from exc
            object.__setattr__(self, "metric_matrix", _readonly(g))
            object.__setattr__(self, "_chol", chol)
        elif self.metric_matrix is not None:
            raise ContractViolation(f"{self.variant.value} does not take a metric matrix")

    @property
    def is_generalized(self) -> bool:
        return self.variant in _GENERALIZED

    @property
    def is_quotient(self) -> bool:
        """True for the Grassmann variants (frames identified up to rotation)."""
        return self.variant in _QUOTIENT

    def metric_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return G^{-1} rhs via the cached Cholesky factorization."""
        if not self.is_generalized:
            return rhs
        return scipy.linalg.cho_solve(self._chol, rhs)


def stiefel() -> ManifoldKind:
    return ManifoldKind(ManifoldVariant.STIEFEL)


def grassmann() -> ManifoldKind:
    return ManifoldKind(ManifoldVariant.GRASSMANN)


def generalized_stiefel(metric_matrix: np.ndarray) -> ManifoldKind:
    return ManifoldKind(ManifoldVariant.GENERALIZED_STIEFEL, metric_matrix)


def generalized_grassmann(metric_matrix: np.ndarray) -> ManifoldKind:
    return ManifoldKind(ManifoldVariant.GENERALIZED_GRASSMANN, metric_matrix)


@dataclass(frozen=True)
class StiefelPoint:
    """A D x d frame on some manifold kind.  The matrix is stored read-only."""

    matrix: np.ndarray
    kind: ManifoldKind

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ContractViolation(f"point matrix must be 2-d, got ndim {m.ndim}")
        if m.shape[0] < m.shape[1]:
            raise ContractViolation(f"need D >= d, got shape {m.shape}")
        if self.kind.is_generalized and self.kind.metric_matrix.shape[0] != m.shape[0]:
            raise ContractViolation(
                f"metric matrix is {self.kind.metric_matrix.shape[0]}-dimensional "
                f"but the frame has {m.shape[0]} rows"
            )
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dims(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class TangentVector:
    """A tangent direction attached to the point it was computed at."""

    matrix: np.ndarray
    base_point: StiefelPoint

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != self.base_point.matrix.shape:
            raise ContractViolation(
                f"tangent shape {m.shape} does not match base point {self.base_point.matrix.shape}"
            )
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def _gram(point: StiefelPoint) -> np.ndarray:
    u = point.matrix
    if point.kind.is_generalized:
        return u.T @ (point.kind.metric_matrix @ u)
    return u.T @ u


def check_point(point: StiefelPoint, tol: float = POINT_TOL) -> None:
    """Raise ContractViolation unless the frame invariant holds within tol."""
    d = point.matrix.shape[1]
    err = np.linalg.norm(_gram(point) - np.eye(d))
    if not np.isfinite(err) or err > tol:
        raise ContractViolation(f"frame is off the manifold: ||U^T (G) U - I|| = {err:.3e} > {tol:g}")


def check_tangent(vec: TangentVector, tol: float = TANGENT_TOL) -> None:
    """Raise ContractViolation unless vec satisfies its kind's tangency condition."""
    point = vec.base_point
    u, xi = point.matrix, vec.matrix
    kind = point.kind
    if kind.is_generalized:
        cross = u.T @ (kind.metric_matrix @ xi)
    else:
        cross = u.T @ xi
    resid = cross if kind.is_quotient else _sym(cross)
    err = np.linalg.norm(resid)
    if not np.isfinite(err) or err > tol:
        raise ContractViolation(f"vector is not tangent: residual {err:.3e} > {tol:g}")


def _check_attached(point: StiefelPoint, vec: TangentVector, name: str) -> None:
    if vec.base_point is point:
        return
    if vec.base_point.kind is not point.kind and vec.base_point.kind != point.kind:
        raise ContractViolation(f"{name} is attached to a different manifold kind")
    if vec.base_point.matrix.shape != point.matrix.shape or not np.array_equal(
        vec.base_point.matrix, point.matrix
    ):
        raise ContractViolation(f"{name} is attached to a different base point")


def inner(point: StiefelPoint, xi: TangentVector, eta: TangentVector) -> float:
    """Riemannian metric: tr(xi^T eta), or tr(xi^T G^{-1} eta) on generalized kinds."""
    _check_attached(point, xi, "xi")
    _check_attached(point, eta, "eta")
    if point.kind.is_generalized:
        return float(np.sum(xi.matrix * point.kind.metric_solve(eta.matrix)))
    return float(np.sum(xi.matrix * eta.matrix))


def project_tangent(point: StiefelPoint, ambient: np.ndarray) -> TangentVector:
    """Project an ambient D x d matrix onto the tangent space at point.

    Stiefel removes the symmetric part of U^T Z (U^T G Z when generalized);
    the Grassmann variants remove the full horizontal component U (U^T (G) Z).
    """
    u = point.matrix
    z = np.asarray(ambient, dtype=float)
    if z.shape != u.shape:
        raise ContractViolation(f"ambient shape {z.shape} does not match point {u.shape}")
    kind = point.kind
    cross = u.T @ (kind.metric_matrix @ z) if kind.is_generalized else u.T @ z
    if kind.is_quotient:
        t = z - u @ cross
    else:
        t = z - u @ _sym(cross)
    return TangentVector(t, point)


def _qr_positive(a: np.ndarray) -> np.ndarray:
    """Thin QR factor with the R diagonal forced positive (deterministic sign)."""
    q, r = np.linalg.qr(a)
    diag = np.diag(r)
    if np.abs(diag).min(initial=np.inf) <= 1e-12 * max(1.0, np.abs(diag).max(initial=0.0)):
        raise RetractionError("argument is numerically rank-deficient")
    signs = np.sign(diag)
    return q * signs


def _orthonormalize(kind: ManifoldKind, w: np.ndarray) -> np.ndarray:
    if not kind.is_generalized:
        return _qr_positive(w)
    # G-orthonormalize: W (R)^{-1} with R^T R = W^T G W, so (W R^{-1})^T G (W R^{-1}) = I.
    gram = w.T @ (kind.metric_matrix @ w)
    try:
        r = scipy.linalg.cholesky(_sym(gram), lower=False)
    except scipy.linalg.LinAlgError as exc:
        raise RetractionError("argument is numerically rank-deficient under the metric") from exc
    return scipy.linalg.solve_triangular(r, w.T, trans="T", lower=False).T


def retract(point: StiefelPoint, xi: TangentVector) -> StiefelPoint:
    """First-order retraction: orthonormalize U + xi (QR, or G-Cholesky)."""
    _check_attached(point, xi, "xi")
    return StiefelPoint(_orthonormalize(point.kind, point.matrix + xi.matrix), point.kind)


def transport(source: StiefelPoint, target: StiefelPoint, xi: TangentVector) -> TangentVector:
    """Projection vector transport: drop xi onto the tangent space at target."""
    _check_attached(source, xi, "xi")
    if target.kind != source.kind:
        raise ContractViolation("transport endpoints live on different manifold kinds")
    return project_tangent(target, xi.matrix)


def random_point(dim_ambient: int, dim_subspace: int, seed: int, kind: ManifoldKind) -> StiefelPoint:
    """Seeded random frame: orthonormalized standard-normal D x d draw."""
    if dim_subspace < 1 or dim_ambient < dim_subspace:
        raise ContractViolation(f"need 1 <= d <= D, got D={dim_ambient}, d={dim_subspace}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim_ambient, dim_subspace))
    return StiefelPoint(_orthonormalize(kind, a), kind)
