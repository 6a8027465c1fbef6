import math

import numpy as np
import pytest

from _oracles import random_skew, stiefel_exp_reference
from stiefelinj.config import TOL
from stiefelinj.errors import DimensionMismatch
from stiefelinj.skewlin import haar_rotation, logm_so
from stiefelinj.stiefel import (
    BetaParam,
    TangentAH,
    TotalSpaceElement,
    check_stiefel,
    curve_length,
    exp_derivative,
    exp_stiefel,
    fiber_element,
    horizontal_lift,
    metric_inner,
    normalize,
    project_to_stiefel,
    total_space_inner,
)

BETAS = [0.2, 0.5, 0.75, 1.0, 1.5]


def _random_tangent(rng, n, p, frame=None):
    return TangentAH(random_skew(rng, p), rng.standard_normal((n - p, p)), frame)


def _corner_H(n, p):
    H = np.zeros((n - p, p))
    H[:2, :2] = np.eye(2)
    return H


# ---------------------------------------------------------------- BetaParam


def test_beta_param_flags():
    assert BetaParam(0.5).canonical and BetaParam(0.5).alpha == 0.0
    assert BetaParam(1.0).euclidean and BetaParam(1.0).alpha == -0.5
    assert not BetaParam(0.3).canonical
    for b in (1e-3, 0.3, 2.0, 50.0):
        assert BetaParam(b).alpha > -1


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_beta_param_rejects(bad):
    with pytest.raises(ValueError):
        BetaParam(bad)


# ---------------------------------------------------------------- tangent vectors


def test_tangent_validation():
    with pytest.raises(ValueError):
        TangentAH(np.ones((2, 2)), np.zeros((2, 2)))
    with pytest.raises(DimensionMismatch):
        TangentAH(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        TangentAH(np.zeros((2, 2)), np.zeros((2, 2)), frame=np.eye(5))


def test_tangent_ambient_roundtrip_and_tangency():
    rng = np.random.default_rng(0)
    Q = haar_rotation(5, rng)
    u = _random_tangent(rng, 5, 2, Q)
    X, xi = u.base_point, u.ambient()
    assert np.linalg.norm(X.T @ xi + xi.T @ X) <= TOL.tangent
    v = TangentAH.from_ambient(xi, Q)
    assert np.allclose(v.A, u.A, atol=1e-14) and np.allclose(v.H, u.H, atol=1e-14)
    with pytest.raises(ValueError):
        TangentAH.from_ambient(np.ones((5, 2)), Q)


def test_check_stiefel():
    check_stiefel(np.eye(4, 2))
    with pytest.raises(ValueError):
        check_stiefel(2 * np.eye(4, 2))
    with pytest.raises(DimensionMismatch):
        check_stiefel(np.eye(2, 4))


# ---------------------------------------------------------------- metric


@pytest.mark.parametrize("beta", BETAS)
def test_metric_of_witness_direction(beta):
    u = TangentAH(np.zeros((2, 2)), _corner_H(4, 2))
    assert metric_inner(BetaParam(beta), u, u) == 2.0


def test_metric_zero_and_canonical_value():
    rng = np.random.default_rng(1)
    z = TangentAH(np.zeros((2, 2)), np.zeros((2, 2)))
    assert metric_inner(BetaParam(0.7), z, _random_tangent(rng, 4, 2)) == 0.0
    D = np.array([[0.0, -1.0], [1.0, 0.0]])
    u = TangentAH(D, np.zeros((2, 2)))
    assert metric_inner(BetaParam(0.5), u, u) == 1.0


def test_metric_properties():
    rng = np.random.default_rng(2)
    mp = BetaParam(0.8)
    u, v, w = (_random_tangent(rng, 5, 3) for _ in range(3))
    assert metric_inner(mp, u, v) == pytest.approx(metric_inner(mp, v, u), abs=1e-15)
    uv = TangentAH(2 * u.A - v.A, 2 * u.H - v.H)
    lhs = metric_inner(mp, uv, w)
    assert lhs == pytest.approx(2 * metric_inner(mp, u, w) - metric_inner(mp, v, w), abs=1e-13)
    assert metric_inner(mp, u, u) > 0


def test_metric_requires_same_point():
    rng = np.random.default_rng(3)
    u = _random_tangent(rng, 4, 2)
    v = _random_tangent(rng, 4, 2, haar_rotation(4, rng))
    with pytest.raises(DimensionMismatch):
        metric_inner(BetaParam(1.0), u, v)
    with pytest.raises(DimensionMismatch):
        metric_inner(BetaParam(1.0), u, _random_tangent(rng, 5, 2))


def test_normalize():
    rng = np.random.default_rng(4)
    mp = BetaParam(0.3)
    u = normalize(mp, _random_tangent(rng, 5, 2))
    assert metric_inner(mp, u, u) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        normalize(mp, TangentAH(np.zeros((2, 2)), np.zeros((3, 2))))


# ---------------------------------------------------------------- horizontal lift


def test_lift_examples():
    z = TangentAH(np.zeros((2, 2)), np.zeros((2, 2)))
    lift = horizontal_lift(BetaParam(0.8), z)
    assert not lift.Omega.any() and not lift.Psi.any()

    rng = np.random.default_rng(5)
    u = _random_tangent(rng, 5, 2)
    can = horizontal_lift(BetaParam(0.5), u)
    assert can.Psi is None
    assert np.array_equal(can.Omega[:2, :2], u.A)
    assert np.array_equal(can.Omega[2:, :2], u.H)
    assert np.array_equal(can.Omega[:2, 2:], -u.H.T)
    assert not can.Omega[2:, 2:].any()

    D = np.array([[0.0, -1.0], [1.0, 0.0]])
    euc = horizontal_lift(BetaParam(1.0), TangentAH(D, np.zeros((2, 2))))
    assert np.array_equal(euc.Omega[:2, :2], 2 * D)
    assert np.array_equal(euc.Psi, D)


@pytest.mark.parametrize("beta", [0.2, 0.4, 0.75, 1.0, 2.0])
def test_lift_is_isometric(beta):
    rng = np.random.default_rng(6)
    mp = BetaParam(beta)
    for _ in range(20):
        u, v = _random_tangent(rng, 6, 3), _random_tangent(rng, 6, 3)
        lu, lv = horizontal_lift(mp, u), horizontal_lift(mp, v)
        assert total_space_inner(mp, lu, lv) == pytest.approx(metric_inner(mp, u, v), abs=1e-12)


# ---------------------------------------------------------------- exponential


@pytest.mark.parametrize("beta", BETAS)
def test_exp_at_zero_time(beta):
    rng = np.random.default_rng(7)
    Q = haar_rotation(5, rng)
    u = _random_tangent(rng, 5, 2, Q)
    assert np.linalg.norm(exp_stiefel(BetaParam(beta), u, 0.0) - Q[:, :2]) <= 1e-15


@pytest.mark.parametrize("beta", BETAS)
def test_exp_matches_reference_and_stays_on_manifold(beta):
    rng = np.random.default_rng(8)
    mp = BetaParam(beta)
    for _ in range(10):
        u = _random_tangent(rng, 6, 2)
        t = rng.uniform(0.0, 3.0)
        X = exp_stiefel(mp, u, t)
        check_stiefel(X)
        assert np.linalg.norm(X - stiefel_exp_reference(beta, u.A, u.H, t)) <= 1e-12


def test_exp_left_translation():
    rng = np.random.default_rng(9)
    mp = BetaParam(0.7)
    Q = haar_rotation(5, rng)
    u = _random_tangent(rng, 5, 3)
    uQ = TangentAH(u.A, u.H, Q)
    assert np.linalg.norm(exp_stiefel(mp, uQ, 1.2) - Q @ exp_stiefel(mp, u, 1.2)) <= 1e-13


@pytest.mark.parametrize("beta", BETAS)
def test_exp_half_turn(beta):
    u = TangentAH(np.zeros((2, 2)), _corner_H(4, 2))
    X = exp_stiefel(BetaParam(beta), u, math.pi)
    expected = np.vstack([-np.eye(2), np.zeros((2, 2))])
    assert np.linalg.norm(X - expected) <= 1e-14


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 1.4])
def test_geodesic_has_constant_speed(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(10)
    u = _random_tangent(rng, 5, 2)
    speed0 = math.sqrt(metric_inner(mp, u, u))
    h = 1e-5
    for t in np.linspace(0.0, 3.0, 7):
        X = exp_stiefel(mp, u, t)
        dX = (exp_stiefel(mp, u, t + h) - exp_stiefel(mp, u, t - h)) / (2 * h)
        # complete X to a frame and read off the (A, H) coordinates of the velocity
        Q = np.linalg.qr(np.hstack([X, rng.standard_normal((5, 3))]))[0]
        Q[:, :2] = X
        coords = Q.T @ dX
        A = 0.5 * (coords[:2] - coords[:2].T)
        speed = math.sqrt(beta * np.sum(A**2) + np.sum(coords[2:] ** 2))
        assert speed == pytest.approx(speed0, abs=1e-6)


# ---------------------------------------------------------------- exp derivative


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 1.3])
def test_exp_derivative_matches_finite_difference(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(11)
    u, v = _random_tangent(rng, 5, 2), _random_tangent(rng, 5, 2)
    t, h = 1.3, 1e-6

    def at(eps):
        return exp_stiefel(mp, TangentAH(u.A + eps / t * v.A, u.H + eps / t * v.H), t)

    fd = (at(h) - at(-h)) / (2 * h)
    assert np.linalg.norm(exp_derivative(mp, u, v, t) - fd) <= 1e-8


def test_exp_derivative_canonical_paths_agree():
    mp = BetaParam(0.5)
    rng = np.random.default_rng(12)
    u, v = _random_tangent(rng, 6, 3), _random_tangent(rng, 6, 3)
    a = exp_derivative(mp, u, v, 2.1)
    b = exp_derivative(mp, u, v, 2.1, canonical=False)
    assert np.linalg.norm(a - b) <= 1e-13
    with pytest.raises(ValueError):
        exp_derivative(BetaParam(0.7), u, v, 1.0, canonical=True)


def test_canonical_path_is_limit_of_noncanonical():
    rng = np.random.default_rng(13)
    u = _random_tangent(rng, 5, 2)
    X = exp_stiefel(BetaParam(0.5), u, 1.7)
    for b in (0.5 - 1e-6, 0.5 + 1e-6):
        assert np.linalg.norm(exp_stiefel(BetaParam(b), u, 1.7) - X) <= 1e-5


# ---------------------------------------------------------------- total space and fibers


def test_projection_examples():
    assert np.array_equal(project_to_stiefel(BetaParam(0.7), TotalSpaceElement(np.eye(4), np.eye(2))),
                          np.eye(4, 2))
    g = TotalSpaceElement(np.eye(3), -np.eye(2))
    assert np.array_equal(project_to_stiefel(BetaParam(1.5), g), -np.eye(3, 2))
    assert np.array_equal(project_to_stiefel(BetaParam(0.5), TotalSpaceElement(np.eye(3), p=2)),
                          np.eye(3, 2))


@pytest.mark.parametrize("beta", [0.3, 1.2])
def test_projection_constant_on_fibers(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(14)
    for _ in range(20):
        Q, V = haar_rotation(5, rng), haar_rotation(2, rng)
        R1, R2 = haar_rotation(2, rng), haar_rotation(3, rng)
        B = np.zeros((5, 5))
        B[:2, :2], B[2:, 2:] = R1, R2
        X = project_to_stiefel(mp, TotalSpaceElement(Q, V))
        Y = project_to_stiefel(mp, TotalSpaceElement(Q @ B, V @ R1))
        assert np.linalg.norm(X - Y) <= 1e-12


@pytest.mark.parametrize("beta", BETAS)
def test_fiber_element_projects_to_geodesic_endpoint(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(15)
    for _ in range(10):
        Q = haar_rotation(5, rng)
        u = normalize(mp, _random_tangent(rng, 5, 2, Q))
        rho = rng.uniform(0.5, 3.5)
        g = fiber_element(mp, u, rho, rng)
        assert np.linalg.norm(project_to_stiefel(mp, g) - exp_stiefel(mp, u, rho)) <= 1e-10
        assert g.V is None if mp.canonical else g.V.shape == (2, 2)


def test_fiber_identity_stabilizer_is_group_exponential():
    from stiefelinj.skewlin import expm_skew

    mp = BetaParam(0.8)
    rng = np.random.default_rng(16)
    u = normalize(mp, _random_tangent(rng, 4, 2))
    g = fiber_element(mp, u, 1.4, stabilizer=(np.eye(2), np.eye(2)))
    lift = horizontal_lift(mp, u)
    assert np.array_equal(g.Q, expm_skew(1.4 * lift.Omega))
    assert np.array_equal(g.V, expm_skew(1.4 * lift.Psi))


def test_fiber_singleton_for_codimension_one_canonical():
    mp = BetaParam(0.5)
    rng = np.random.default_rng(17)
    u = normalize(mp, _random_tangent(rng, 4, 3))
    g1 = fiber_element(mp, u, 2.0, np.random.default_rng(1))
    g2 = fiber_element(mp, u, 2.0, np.random.default_rng(2))
    assert np.array_equal(g1.Q, g2.Q)


def test_fiber_element_needs_randomness():
    with pytest.raises(ValueError):
        fiber_element(BetaParam(0.8), TangentAH(np.zeros((2, 2)), np.ones((2, 2))), 1.0)


# ---------------------------------------------------------------- curve length


def test_curve_length_zero():
    assert curve_length(BetaParam(0.8), np.zeros((4, 4)), np.zeros((2, 2))) == 0.0
    assert curve_length(BetaParam(0.5), np.zeros((4, 4)), p=2) == 0.0


@pytest.mark.parametrize("beta", BETAS)
def test_curve_length_of_scaled_lift(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(18)
    u = normalize(mp, _random_tangent(rng, 5, 2))
    T = 2.3
    lift = horizontal_lift(mp, u)
    L = curve_length(mp, T * lift.Omega, None if lift.Psi is None else T * lift.Psi, p=2)
    assert L == pytest.approx(T, abs=1e-12)


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.1])
def test_identity_stabilizer_log_gives_length_rho(beta):
    mp = BetaParam(beta)
    rng = np.random.default_rng(19)
    u = normalize(mp, _random_tangent(rng, 4, 2))
    rho = 1.0  # small enough that every rotation angle stays below pi
    g = fiber_element(mp, u, rho, stabilizer=(np.eye(2), np.eye(2)))
    Om = logm_so(g.Q)
    Psi = None if g.V is None else logm_so(g.V)
    assert curve_length(mp, Om, Psi, p=2) == pytest.approx(rho, abs=1e-10)


def test_curve_length_nonprincipal_example():
    beta = 1.5
    a = 2 * beta / (1 - 2 * beta)
    b = math.sqrt(2 * (1 - beta**2 / (1 - 2 * beta) ** 2))
    pi = math.pi
    Om = np.array([[0, a * pi, -b * pi], [-a * pi, 0, -b * pi], [b * pi, b * pi, 0]])
    Psi = np.array([[0, -pi], [pi, 0]])
    L = curve_length(BetaParam(beta), Om, Psi)
    assert L == pytest.approx(pi * math.sqrt(2.5), abs=1e-12)
    assert L < pi * math.sqrt(2 * beta)


def test_curve_length_shape_errors():
    with pytest.raises(DimensionMismatch):
        curve_length(BetaParam(0.8), np.zeros((4, 4)), np.zeros((3, 3)), p=2)
    with pytest.raises(DimensionMismatch):
        curve_length(BetaParam(0.8), np.zeros((4, 3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        curve_length(BetaParam(0.5), np.zeros((4, 4)))
