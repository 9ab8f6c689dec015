"""Riemannian first- and second-order solvers for the discriminant objective.

`solve_cg` is a Fletcher-Reeves conjugate gradient with projection vector
transport and Armijo backtracking; `solve_tr` is a trust-region method whose
subproblems are solved by Steihaug-Toint truncated conjugate gradient on the
tangent space.  Both are deterministic given (problem, init, config): reruns
produce bit-identical traces.

Inner products and norms inside the solvers are plain Frobenius traces of the
tangent matrices, matching the update rules they implement.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import cost as cost_mod
from .cost import DiscriminantProblem
from .errors import ContractViolation, SolverError
from .manifolds import (
    StiefelPoint,
    TangentVector,
    check_point,
    project_tangent,
    retract,
    transport,
)

# feasibility drift beyond this triggers a warning and re-orthonormalization
DRIFT_TOL = 1e-8

Callback = Callable[[int, float, float], None]


class Termination(Enum):
    GRAD_TOL = "grad_tol"
    MAX_ITER = "max_iter"
    STEP_TOO_SMALL = "step_too_small"


@dataclass(frozen=True)
class CgConfig:
    """Conjugate-gradient settings.

    grad_tol is compared against the squared Frobenius gradient norm by
    default (set squared_grad_norm=False for the unsquared test).  beta_rule
    is "fletcher-reeves" or "polak-ribiere" (the latter transported and
    clipped at zero).
    """

    grad_tol: float = 1e-5
    max_iter: int = 200
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 50
    squared_grad_norm: bool = True
    beta_rule: str = "fletcher-reeves"

    def __post_init__(self) -> None:
        if not (0.0 < self.armijo_c < 1.0):
            raise ContractViolation(f"armijo_c must lie in (0, 1), got {self.armijo_c}")
        if not (0.0 < self.armijo_shrink < 1.0):
            raise ContractViolation(f"armijo_shrink must lie in (0, 1), got {self.armijo_shrink}")
        if self.grad_tol <= 0 or self.initial_step <= 0:
            raise ContractViolation("grad_tol and initial_step must be positive")
        if self.max_iter < 1 or self.max_backtracks < 1:
            raise ContractViolation("max_iter and max_backtracks must be at least 1")
        if self.beta_rule not in ("fletcher-reeves", "polak-ribiere"):
            raise ContractViolation(f"unknown beta_rule {self.beta_rule!r}")


@dataclass(frozen=True)
class TrConfig:
    """Trust-region settings.

    Fields left as None are resolved per problem at solve time: delta_bar to
    sqrt(d), delta0 to delta_bar / 8, tcg_max_inner to D * d.
    """

    grad_tol: float = 1e-6
    max_outer: int = 200
    delta_bar: float | None = None
    delta0: float | None = None
    rho_prime: float = 0.1
    tcg_max_inner: int | None = None
    tcg_kappa: float = 0.1
    tcg_theta: float = 1.0

    def __post_init__(self) -> None:
        if self.grad_tol <= 0:
            raise ContractViolation("grad_tol must be positive")
        if self.max_outer < 1:
            raise ContractViolation("max_outer must be at least 1")
        if not (0.0 < self.rho_prime < 0.25):
            raise ContractViolation(f"rho_prime must lie in (0, 0.25), got {self.rho_prime}")
        if self.delta_bar is not None and self.delta_bar <= 0:
            raise ContractViolation("delta_bar must be positive")
        if self.tcg_max_inner is not None and self.tcg_max_inner < 1:
            raise ContractViolation("tcg_max_inner must be at least 1")
        if self.tcg_kappa <= 0 or self.tcg_theta <= 0:
            raise ContractViolation("tcg_kappa and tcg_theta must be positive")


@dataclass(frozen=True)
class OptimizationResult:
    point: StiefelPoint
    cost_trace: np.ndarray       # objective at the initial point and each accepted iterate
    grad_norm_trace: np.ndarray  # Frobenius gradient norm at the same points
    termination: Termination
    iterations: int              # outer iterations performed (accepted + rejected)
    wall_time: float

    @property
    def final_cost(self) -> float:
        return float(self.cost_trace[-1])


def _fro_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a * b))


def _safe_cost(problem: DiscriminantProblem, point: StiefelPoint) -> float:
    value = cost_mod.cost(problem, point)
    if not math.isfinite(value):
        raise SolverError(f"objective is non-finite ({value})")
    return value


def _guard_drift(point: StiefelPoint) -> StiefelPoint:
    """Re-orthonormalize (with a warning) if the iterate drifted off the manifold."""
    u = point.matrix
    kind = point.kind
    gram = u.T @ (kind.metric_matrix @ u) if kind.is_generalized else u.T @ u
    drift = np.linalg.norm(gram - np.eye(u.shape[1]))
    if drift <= DRIFT_TOL:
        return point
    warnings.warn(f"iterate drifted off the manifold ({drift:.3e}); re-orthonormalizing")
    zero = TangentVector(np.zeros_like(u), point)
    return retract(point, zero)


def solve_cg(
    problem: DiscriminantProblem,
    init: StiefelPoint,
    config: CgConfig = CgConfig(),
    callback: Callback | None = None,
) -> OptimizationResult:
    """Riemannian conjugate gradient with Armijo backtracking.

    Directions follow the Fletcher-Reeves rule (first iteration is steepest
    descent) with the previous direction carried over by projection transport;
    any non-descent direction is reset to steepest descent.  Stops when the
    squared Frobenius gradient norm falls to grad_tol, after max_iter accepted
    steps, or when backtracking exhausts max_backtracks.
    """
    start = time.perf_counter()
    check_point(init, tol=cost_mod.EVAL_POINT_TOL)
    point = init
    f = _safe_cost(problem, point)
    grad = cost_mod.riemannian_grad(problem, point)
    gnorm = grad.norm

    costs = [f]
    gnorms = [gnorm]
    termination = Termination.MAX_ITER
    iterations = 0
    prev_point: StiefelPoint | None = None
    prev_grad: TangentVector | None = None
    prev_dir: TangentVector | None = None

    def _converged(g: float) -> bool:
        measure = g * g if config.squared_grad_norm else g
        return measure <= config.grad_tol

    for k in range(1, config.max_iter + 1):
        if _converged(gnorm):
            termination = Termination.GRAD_TOL
            break

        if prev_dir is None:
            direction = TangentVector(-grad.matrix, point)
        else:
            carried = transport(prev_point, point, prev_dir)
            if config.beta_rule == "fletcher-reeves":
                beta = _fro_inner(grad.matrix, grad.matrix) / _fro_inner(
                    prev_grad.matrix, prev_grad.matrix
                )
            else:
                old = transport(prev_point, point, prev_grad)
                beta = _fro_inner(grad.matrix, grad.matrix - old.matrix) / _fro_inner(
                    prev_grad.matrix, prev_grad.matrix
                )
                beta = max(beta, 0.0)
            direction = TangentVector(-grad.matrix + beta * carried.matrix, point)

        slope = _fro_inner(grad.matrix, direction.matrix)
        if slope >= 0.0:
            direction = TangentVector(-grad.matrix, point)
            slope = -gnorm * gnorm

        # Armijo backtracking; also insist the accepted float value actually
        # dropped so the recorded trace is strictly decreasing
        alpha = config.initial_step
        accepted = None
        for _ in range(config.max_backtracks):
            trial = retract(point, TangentVector(alpha * direction.matrix, point))
            f_trial = _safe_cost(problem, trial)
            if f_trial <= f + config.armijo_c * alpha * slope and f_trial < f:
                accepted = (trial, f_trial)
                break
            alpha *= config.armijo_shrink
        if accepted is None:
            termination = Termination.STEP_TOO_SMALL
            break

        prev_point, prev_grad, prev_dir = point, grad, direction
        point, f = accepted
        point = _guard_drift(point)
        grad = cost_mod.riemannian_grad(problem, point)
        gnorm = grad.norm
        iterations = k
        costs.append(f)
        gnorms.append(gnorm)
        if callback is not None:
            callback(k, f, gnorm)
    else:
        termination = Termination.GRAD_TOL if _converged(gnorm) else Termination.MAX_ITER

    return OptimizationResult(
        point=point,
        cost_trace=np.asarray(costs),
        grad_norm_trace=np.asarray(gnorms),
        termination=termination,
        iterations=iterations,
        wall_time=time.perf_counter() - start,
    )


def _boundary_step(z: np.ndarray, d: np.ndarray, delta: float) -> float:
    """Positive tau with ||z + tau d|| = delta (exists when ||z|| < delta)."""
    zz = _fro_inner(z, z)
    zd = _fro_inner(z, d)
    dd = _fro_inner(d, d)
    disc = zd * zd + dd * (delta * delta - zz)
    return (-zd + math.sqrt(max(disc, 0.0))) / dd


def _truncated_cg(
    problem: DiscriminantProblem,
    point: StiefelPoint,
    grad: TangentVector,
    delta: float,
    max_inner: int,
    kappa: float,
    theta: float,
) -> tuple[np.ndarray, bool]:
    """Steihaug-Toint truncated CG on the tangent space at point.

    Minimizes <g, z> + 0.5 <H z, z> within ||z|| <= delta; stops on negative
    curvature or boundary crossing (step clipped to the boundary) or when the
    residual falls to min(kappa, ||g||^theta) * ||g||.
    """
    g = grad.matrix
    gnorm = float(np.linalg.norm(g))
    stop_resid = gnorm * min(kappa, gnorm**theta)

    z = np.zeros_like(g)
    r = g.copy()
    d = -r
    rr = _fro_inner(r, r)
    for _ in range(max_inner):
        hd = cost_mod.riemannian_hess_vec(problem, point, TangentVector(d, point)).matrix
        dhd = _fro_inner(d, hd)
        if not math.isfinite(dhd):
            raise SolverError("trust-region model is non-finite")
        if dhd <= 0.0:
            return z + _boundary_step(z, d, delta) * d, True
        alpha = rr / dhd
        z_next = z + alpha * d
        if np.linalg.norm(z_next) >= delta:
            return z + _boundary_step(z, d, delta) * d, True
        r = r + alpha * hd
        rr_next = _fro_inner(r, r)
        z = z_next
        if math.sqrt(rr_next) <= stop_resid:
            return z, False
        d = -r + (rr_next / rr) * d
        rr = rr_next
    return z, False


def solve_tr(
    problem: DiscriminantProblem,
    init: StiefelPoint,
    config: TrConfig = TrConfig(),
    callback: Callback | None = None,
) -> OptimizationResult:
    """Riemannian trust-region solver with truncated-CG subproblems.

    Steps are accepted when the actual-to-predicted reduction ratio exceeds
    rho_prime; the radius shrinks by 4 when the ratio is poor (< 0.25) and
    doubles (capped at delta_bar) when it is good (> 0.75) and the subproblem
    step hit the boundary.
    """
    start = time.perf_counter()
    check_point(init, tol=cost_mod.EVAL_POINT_TOL)
    dim_d = init.matrix.shape[1]
    dim_ambient = init.matrix.shape[0]
    delta_bar = config.delta_bar if config.delta_bar is not None else math.sqrt(dim_d)
    delta = config.delta0 if config.delta0 is not None else delta_bar / 8.0
    if not (0.0 < delta <= delta_bar):
        raise ContractViolation(f"need 0 < delta0 <= delta_bar, got {delta} vs {delta_bar}")
    max_inner = config.tcg_max_inner if config.tcg_max_inner is not None else dim_ambient * dim_d

    point = init
    f = _safe_cost(problem, point)
    grad = cost_mod.riemannian_grad(problem, point)
    gnorm = grad.norm

    costs = [f]
    gnorms = [gnorm]
    termination = Termination.MAX_ITER
    iterations = 0

    for k in range(1, config.max_outer + 1):
        if gnorm <= config.grad_tol:
            termination = Termination.GRAD_TOL
            break
        iterations = k

        step, hit_boundary = _truncated_cg(
            problem, point, grad, delta, max_inner, config.tcg_kappa, config.tcg_theta
        )
        hstep = cost_mod.riemannian_hess_vec(problem, point, TangentVector(step, point)).matrix
        predicted = -(_fro_inner(grad.matrix, step) + 0.5 * _fro_inner(step, hstep))
        if not math.isfinite(predicted):
            raise SolverError("trust-region model is non-finite")
        if predicted <= 0.0:
            delta /= 4.0
            continue

        trial = retract(point, TangentVector(step, point))
        f_trial = _safe_cost(problem, trial)
        rho = (f - f_trial) / predicted

        if rho < 0.25:
            delta /= 4.0
        elif rho > 0.75 and hit_boundary:
            delta = min(2.0 * delta, delta_bar)

        if rho > config.rho_prime:
            point = _guard_drift(trial)
            f = f_trial
            grad = cost_mod.riemannian_grad(problem, point)
            gnorm = grad.norm
            costs.append(f)
            gnorms.append(gnorm)
            if callback is not None:
                callback(k, f, gnorm)
    else:
        termination = Termination.GRAD_TOL if gnorm <= config.grad_tol else Termination.MAX_ITER

    return OptimizationResult(
        point=point,
        cost_trace=np.asarray(costs),
        grad_norm_trace=np.asarray(gnorms),
        termination=termination,
        iterations=iterations,
        wall_time=time.perf_counter() - start,
    )
