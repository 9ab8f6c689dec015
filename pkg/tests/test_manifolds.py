"""Frame manifolds: projections, retraction, transport, metric, validation."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlda import (
    ContractViolation,
    ManifoldKind,
    ManifoldVariant,
    RetractionError,
    StiefelPoint,
    TangentVector,
    check_point,
    check_tangent,
    generalized_grassmann,
    generalized_stiefel,
    grassmann,
    inner,
    project_tangent,
    random_point,
    retract,
    stiefel,
    transport,
)
from rlda.checks import random_kind, random_spd
from rlda.manifolds import _qr_positive

ALL_VARIANTS = list(ManifoldVariant)


def _kind_for(variant, dim, seed=0):
    return random_kind(np.random.default_rng(seed), variant, dim)


# ---------------------------------------------------------------- kinds


def test_generalized_kind_requires_metric():
    with pytest.raises(ContractViolation):
        ManifoldKind(ManifoldVariant.GENERALIZED_STIEFEL)


def test_plain_kind_rejects_metric():
    with pytest.raises(ContractViolation):
        ManifoldKind(ManifoldVariant.STIEFEL, np.eye(3))


def test_metric_must_be_symmetric():
    g = np.array([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(ContractViolation, match="symmetric"):
        generalized_stiefel(g)


def test_metric_must_be_positive_definite():
    g = np.diag([1.0, -1.0])
    with pytest.raises(ContractViolation, match="positive definite"):
        generalized_grassmann(g)


def test_metric_must_be_square():
    with pytest.raises(ContractViolation, match="square"):
        generalized_stiefel(np.ones((2, 3)))


def test_metric_solve_inverts_the_metric(rng):
    g = random_spd(rng, 6) + 0.5 * np.eye(6)
    kind = generalized_stiefel(g)
    rhs = rng.standard_normal((6, 2))
    np.testing.assert_allclose(g @ kind.metric_solve(rhs), rhs, atol=1e-10)


def test_kind_flags():
    assert not stiefel().is_generalized and not stiefel().is_quotient
    assert grassmann().is_quotient and not grassmann().is_generalized
    gs = generalized_stiefel(np.eye(2))
    assert gs.is_generalized and not gs.is_quotient
    gg = generalized_grassmann(np.eye(2))
    assert gg.is_generalized and gg.is_quotient


# ---------------------------------------------------------------- points


def test_point_matrix_is_read_only():
    p = random_point(5, 2, 0, stiefel())
    with pytest.raises(ValueError):
        p.matrix[0, 0] = 7.0


def test_point_rejects_wide_matrix():
    with pytest.raises(ContractViolation, match="D >= d"):
        StiefelPoint(np.ones((2, 3)), stiefel())


def test_point_rejects_metric_dimension_mismatch():
    kind = generalized_stiefel(np.eye(4))
    with pytest.raises(ContractViolation):
        StiefelPoint(np.eye(3)[:, :1], kind)


def test_check_point_rejects_non_orthonormal():
    p = StiefelPoint(np.full((3, 1), 0.9), stiefel())
    with pytest.raises(ContractViolation, match="off the manifold"):
        check_point(p)


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_random_point_satisfies_frame_invariant(variant):
    kind = _kind_for(variant, 7)
    p = random_point(7, 3, 11, kind)
    check_point(p)  # raises on violation
    g = kind.metric_matrix if kind.is_generalized else np.eye(7)
    np.testing.assert_allclose(p.matrix.T @ g @ p.matrix, np.eye(3), atol=1e-10)


def test_random_point_is_seed_deterministic_and_seed_sensitive():
    a = random_point(6, 2, 3, stiefel())
    b = random_point(6, 2, 3, stiefel())
    c = random_point(6, 2, 4, stiefel())
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert np.linalg.norm(a.matrix - c.matrix) > 0


def test_random_point_validates_dims():
    with pytest.raises(ContractViolation):
        random_point(2, 3, 0, stiefel())
    with pytest.raises(ContractViolation):
        random_point(4, 0, 0, stiefel())


# ---------------------------------------------------------------- metric


def test_inner_matches_trace_arithmetic():
    # tr(xi^T eta) with xi = (1,2,0), eta = (0,1,1) is 2
    point = StiefelPoint(np.array([[0.0], [0.0], [1.0]]), stiefel())
    xi = TangentVector(np.array([[1.0], [2.0], [0.0]]), point)
    eta = TangentVector(np.array([[0.0], [1.0], [1.0]]), point)
    assert inner(point, xi, eta) == pytest.approx(2.0, abs=1e-15)


def test_inner_generalized_uses_metric_inverse(rng):
    g = random_spd(rng, 5) + 0.5 * np.eye(5)
    kind = generalized_stiefel(g)
    point = random_point(5, 2, 0, kind)
    xi = project_tangent(point, rng.standard_normal((5, 2)))
    eta = project_tangent(point, rng.standard_normal((5, 2)))
    expected = float(np.sum(xi.matrix * np.linalg.solve(g, eta.matrix)))
    assert inner(point, xi, eta) == pytest.approx(expected, rel=1e-12)


def test_inner_rejects_vectors_from_other_points():
    a = random_point(5, 2, 0, stiefel())
    b = random_point(5, 2, 1, stiefel())
    xi = TangentVector(np.zeros((5, 2)), a)
    with pytest.raises(ContractViolation, match="different base point"):
        inner(b, xi, xi)


def test_inner_is_symmetric_positive(rng):
    for variant in ALL_VARIANTS:
        kind = _kind_for(variant, 6)
        point = random_point(6, 2, 5, kind)
        xi = project_tangent(point, rng.standard_normal((6, 2)))
        eta = project_tangent(point, rng.standard_normal((6, 2)))
        assert inner(point, xi, eta) == pytest.approx(inner(point, eta, xi), rel=1e-12)
        assert inner(point, xi, xi) > 0


# ---------------------------------------------------------------- projection


def test_projection_matches_hand_computation():
    # U = e1, Z = (3,4): sym(U^T Z) = 3, so the projection is (0,4)
    point = StiefelPoint(np.array([[1.0], [0.0]]), stiefel())
    out = project_tangent(point, np.array([[3.0], [4.0]]))
    np.testing.assert_allclose(out.matrix, [[0.0], [4.0]], atol=1e-15)


def test_projection_rejects_shape_mismatch():
    point = random_point(4, 2, 0, stiefel())
    with pytest.raises(ContractViolation, match="shape"):
        project_tangent(point, np.ones((4, 3)))


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000))
def test_projection_idempotent_and_tangent(seed):
    rng = np.random.default_rng(seed)
    d_amb = int(rng.integers(3, 14))
    d_sub = int(rng.integers(1, min(5, d_amb) + 1))
    for variant in ALL_VARIANTS:
        kind = _kind_for(variant, d_amb, seed)
        point = random_point(d_amb, d_sub, seed, kind)
        once = project_tangent(point, rng.standard_normal((d_amb, d_sub)))
        twice = project_tangent(point, once.matrix)
        assert np.linalg.norm(twice.matrix - once.matrix) <= 1e-12
        check_tangent(once, tol=1e-8)


def test_projection_of_tangent_is_identity(rng):
    point = random_point(8, 3, 2, stiefel())
    xi = project_tangent(point, rng.standard_normal((8, 3)))
    again = project_tangent(point, xi.matrix)
    np.testing.assert_allclose(again.matrix, xi.matrix, atol=1e-14)


def test_grassmann_projection_is_rotation_equivariant(rng):
    # projecting a rotated ambient at a rotated frame rotates the projection
    point = random_point(9, 3, 1, grassmann())
    z = rng.standard_normal((9, 3))
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    rotated = StiefelPoint(point.matrix @ q, grassmann())
    lhs = project_tangent(rotated, z @ q).matrix
    rhs = project_tangent(point, z).matrix @ q
    assert np.linalg.norm(lhs - rhs) <= 1e-10


def test_check_tangent_rejects_normal_component():
    point = StiefelPoint(np.eye(3)[:, :1], stiefel())
    bad = TangentVector(np.array([[1.0], [0.0], [0.0]]), point)  # along U itself
    with pytest.raises(ContractViolation, match="not tangent"):
        check_tangent(bad)


# ---------------------------------------------------------------- retraction


def test_retraction_normalizes_in_one_dimension():
    point = StiefelPoint(np.array([[1.0], [0.0]]), stiefel())
    xi = TangentVector(np.array([[0.0], [1.0]]), point)
    out = retract(point, xi)
    np.testing.assert_allclose(out.matrix, np.full((2, 1), 1 / np.sqrt(2)), atol=1e-15)


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_retraction_zero_step_is_identity(variant):
    kind = _kind_for(variant, 7)
    point = random_point(7, 3, 9, kind)
    zero = TangentVector(np.zeros((7, 3)), point)
    np.testing.assert_allclose(retract(point, zero).matrix, point.matrix, atol=1e-12)


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_retraction_output_is_on_manifold(variant, rng):
    kind = _kind_for(variant, 7)
    point = random_point(7, 3, 9, kind)
    xi = project_tangent(point, rng.standard_normal((7, 3)))
    check_point(retract(point, xi))


def test_retraction_local_rigidity_decays_quadratically(rng):
    # ||R(t xi) - (U + t xi)|| / t should shrink like t (quadratic residual)
    point = random_point(10, 3, 4, stiefel())
    xi = project_tangent(point, rng.standard_normal((10, 3)))
    xi = TangentVector(xi.matrix / xi.norm, point)
    gaps = []
    for t in (1e-2, 1e-3, 1e-4):
        stepped = retract(point, TangentVector(t * xi.matrix, point))
        gaps.append(np.linalg.norm(stepped.matrix - (point.matrix + t * xi.matrix)) / t)
    assert gaps[0] > gaps[1] > gaps[2]
    # one decade of t buys one decade of residual
    assert gaps[1] <= 0.15 * gaps[0]
    assert gaps[2] <= 0.15 * gaps[1]


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_retraction_first_order_rigidity(variant, rng):
    kind = _kind_for(variant, 8)
    point = random_point(8, 2, 3, kind)
    xi = project_tangent(point, rng.standard_normal((8, 2)))
    xi = TangentVector(xi.matrix / xi.norm, point)
    t = 1e-6
    stepped = retract(point, TangentVector(t * xi.matrix, point))
    fd = (stepped.matrix - point.matrix) / t
    assert np.linalg.norm(fd - xi.matrix) <= 1e-6


def test_retraction_rank_deficient_fails():
    point = StiefelPoint(np.eye(3)[:, :1], stiefel())
    # walking exactly onto -U collapses U + xi to the zero matrix
    anti = TangentVector(-point.matrix, point)
    with pytest.raises(RetractionError, match="rank-deficient"):
        retract(point, anti)


def test_qr_positive_diagonal_sign_fix(rng):
    a = rng.standard_normal((6, 3))
    q = _qr_positive(a)
    np.testing.assert_allclose(q.T @ q, np.eye(3), atol=1e-12)
    r = q.T @ a
    assert (np.diag(r) > 0).all()


# ---------------------------------------------------------------- transport


def test_transport_annihilates_normal_direction():
    # carrying (0,2) from e1 to e2 projects it away entirely
    src = StiefelPoint(np.array([[1.0], [0.0]]), stiefel())
    dst = StiefelPoint(np.array([[0.0], [1.0]]), stiefel())
    xi = TangentVector(np.array([[0.0], [2.0]]), src)
    out = transport(src, dst, xi)
    np.testing.assert_allclose(out.matrix, np.zeros((2, 1)), atol=1e-15)


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_transport_output_is_tangent_at_target(variant, rng):
    kind = _kind_for(variant, 7)
    src = random_point(7, 2, 0, kind)
    dst = random_point(7, 2, 1, kind)
    xi = project_tangent(src, rng.standard_normal((7, 2)))
    out = transport(src, dst, xi)
    assert out.base_point is dst
    check_tangent(out, tol=1e-10)


def test_transport_rejects_kind_mismatch(rng):
    src = random_point(5, 2, 0, stiefel())
    dst = random_point(5, 2, 1, grassmann())
    xi = project_tangent(src, rng.standard_normal((5, 2)))
    with pytest.raises(ContractViolation, match="different manifold kinds"):
        transport(src, dst, xi)


# ---------------------------------------------------------------- metric compatibility


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000))
def test_projection_self_adjoint_in_ambient_metric(seed):
    rng = np.random.default_rng(seed)
    d_amb = int(rng.integers(3, 14))
    d_sub = int(rng.integers(1, min(5, d_amb) + 1))
    for variant in ALL_VARIANTS:
        kind = _kind_for(variant, d_amb, seed)
        point = random_point(d_amb, d_sub, seed, kind)
        z = rng.standard_normal((d_amb, d_sub))
        eta = project_tangent(point, rng.standard_normal((d_amb, d_sub)))
        g = kind.metric_matrix if kind.is_generalized else np.eye(d_amb)
        lhs = float(np.sum(project_tangent(point, z).matrix * (g @ eta.matrix)))
        rhs = float(np.sum(z * (g @ eta.matrix)))
        assert abs(lhs - rhs) <= 1e-10
